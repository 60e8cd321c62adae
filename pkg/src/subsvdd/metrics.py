"""Confusion counts and the geometric-mean score for one-class evaluation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoNegatives, NoPositives


@dataclass(frozen=True)
class ConfusionCounts:
    """Binary confusion counts; the target class is the positive one."""

    tp: int
    fn: int
    tn: int
    fp: int


def confusion_from_labels(is_target, predicted_positive):
    truth = np.asarray(is_target, dtype=bool)
    pred = np.asarray(predicted_positive, dtype=bool)
    if truth.shape != pred.shape:
        raise ValueError("label arrays must have equal length")
    return ConfusionCounts(
        tp=int((truth & pred).sum()),
        fn=int((truth & ~pred).sum()),
        tn=int((~truth & ~pred).sum()),
        fp=int((~truth & pred).sum()),
    )


def gmean(c: ConfusionCounts):
    """sqrt(tpr * tnr); undefined without both positives and negatives."""
    pos = c.tp + c.fn
    neg = c.tn + c.fp
    if pos == 0:
        raise NoPositives("no positive (target) samples to score")
    if neg == 0:
        raise NoNegatives("no negative (outlier) samples to score")
    return math.sqrt((c.tp / pos) * (c.tn / neg))
