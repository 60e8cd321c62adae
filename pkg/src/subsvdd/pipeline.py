"""End-to-end fitting: method selection, scaling, kernel basis, training, bundling.

A method is written ``family-kernel[-psiK-dir]``, e.g. ``svdd-linear``,
``ssvdd-rbf-psi1-max`` or ``nssvdd-linear-psi2-min``. Plain SVDD skips the
subspace loop entirely (Q = identity); the subspace families run the
iterative optimizer in the (possibly kernel-induced) feature space.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .data import zscore_apply, zscore_fit
from .errors import DimensionMismatch
from .kernel import build_npt, npt_map
from .metrics import confusion_from_labels, gmean
from .model_store import TrainedModel
from .subspace import TraceRow, TrainConfig, describe, objective, project, train
from .svdd import decide_batch, solve_dual

log = logging.getLogger("subsvdd")

FAMILIES = ("svdd", "ssvdd", "nssvdd")
KERNELS = ("linear", "rbf")


@dataclass(frozen=True)
class MethodSpec:
    """Parsed method string: family, feature space, regularizer, direction."""

    family: str
    kernel: str
    psi: int | None = None
    direction: str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown method family {self.family!r}")
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.family == "svdd":
            if self.psi is not None or self.direction is not None:
                raise ValueError("plain svdd takes no psi/direction")
        else:
            if self.psi not in (0, 1, 2, 3):
                raise ValueError("psi must be one of 0..3")
            if self.direction not in ("min", "max"):
                raise ValueError("direction must be 'min' or 'max'")

    @property
    def optimizer(self):
        return {"svdd": None, "ssvdd": "gradient", "nssvdd": "newton"}[self.family]

    def __str__(self):
        if self.family == "svdd":
            return f"{self.family}-{self.kernel}"
        return f"{self.family}-{self.kernel}-psi{self.psi}-{self.direction}"


def parse_method(text):
    parts = text.strip().lower().split("-")
    if len(parts) == 2:
        return MethodSpec(family=parts[0], kernel=parts[1])
    if len(parts) == 4:
        if not parts[2].startswith("psi"):
            raise ValueError(f"bad method string {text!r}")
        return MethodSpec(
            family=parts[0],
            kernel=parts[1],
            psi=int(parts[2][3:]),
            direction=parts[3],
        )
    raise ValueError(f"bad method string {text!r}")


def _eval_closure(x_eval_work, is_target):
    """Score a candidate subspace model on pre-mapped held-out points."""

    def eval_fn(q, desc, y, alpha):
        _, pos = decide_batch(q @ x_eval_work, desc, y, alpha)
        return gmean(confusion_from_labels(is_target, pos))

    return eval_fn


def fit_occ_model(
    features,
    method: MethodSpec,
    *,
    C,
    d=None,
    beta=1.0,
    eta=0.01,
    sigma=None,
    k_max=100,
    seed=42,
    hessian_beta_mode="as_written",
    damping=0.0,
    zscore=False,
    rank_tol=1e-10,
    eval_data=None,
):
    """Fit one model on a D x Nt block of target-class training columns.

    ``eval_data`` is an optional (X_eval, is_target) pair in the raw input
    space; when given, each iteration of the trace carries the Gmean of the
    current model on it. Returns (TrainedModel, trace).
    """
    x_raw = np.asarray(features, dtype=np.float64)
    if x_raw.ndim != 2:
        raise DimensionMismatch("training features must be a D x N matrix")
    scaling = None
    work = x_raw
    if zscore:
        mean, std = zscore_fit(x_raw)
        scaling = {"mean": mean.tolist(), "std": std.tolist()}
        work = zscore_apply(x_raw, mean, std)

    npt = None
    if method.kernel == "rbf":
        if sigma is None:
            raise ValueError("rbf methods need sigma")
        npt = build_npt(work, sigma, rank_tol=rank_tol)
        work = npt.phi

    x_eval_work = None
    is_target = None
    if eval_data is not None:
        x_eval, is_target = eval_data
        x_eval = np.asarray(x_eval, dtype=np.float64)
        if scaling is not None:
            x_eval = zscore_apply(
                x_eval, np.asarray(scaling["mean"]), np.asarray(scaling["std"])
            )
        x_eval_work = npt_map(x_eval, npt) if npt is not None else x_eval

    feat_dim = work.shape[0]
    if method.family == "svdd":
        q = np.eye(feat_dim)
        alpha = solve_dual(work.T @ work, C)
        desc = describe(alpha, work)
        score = None
        if x_eval_work is not None:
            _, pos = decide_batch(x_eval_work, desc, work, alpha)
            score = gmean(confusion_from_labels(is_target, pos))
        zeros = np.zeros(alpha.alpha.shape[0])
        trace = [
            TraceRow(
                iteration=1,
                objective=objective(q, work, alpha.alpha, zeros, 0.0),
                gmean=score,
                orth_error=0.0,
            )
        ]
        d_used = feat_dim
        q_final, y_train = q, work
    else:
        if d is None:
            raise ValueError("subspace methods need the target dimension d")
        d_req = int(d)
        d_used = d_req
        if method.kernel == "rbf" and d_req > feat_dim:
            log.warning(
                "requested d=%d exceeds retained kernel rank %d; clamping",
                d_req,
                feat_dim,
            )
            d_used = feat_dim
        cfg = TrainConfig(
            d=d_used,
            C=C,
            beta=beta,
            eta=eta,
            reg_kind=f"psi{method.psi}",
            direction=method.direction,
            optimizer=method.optimizer,
            k_max=k_max,
            seed=seed,
            hessian_beta_mode=hessian_beta_mode,
            damping=damping,
        )
        eval_fn = None
        if x_eval_work is not None:
            eval_fn = _eval_closure(x_eval_work, is_target)
        fit = train(work, cfg, eval_fn=eval_fn)
        q_final, desc, y_train, trace = fit.q, fit.description, fit.y_train, fit.trace

    config = {
        "method": method.family,
        "kernel": method.kernel,
        "psi": method.psi,
        "direction": method.direction,
        "optimizer": method.optimizer,
        "d": int(d_used),
        "C": float(C),
        "beta": float(beta),
        "eta": float(eta),
        "k_max": int(k_max),
        "seed": int(seed),
        "hessian_beta_mode": hessian_beta_mode,
        "damping": float(damping),
        "sigma": None if sigma is None else float(sigma),
        "zscore": bool(zscore),
        "scaling": scaling,
    }
    model = TrainedModel(
        config=config, q=q_final, description=desc, y_train=y_train, npt=npt
    )
    return model, trace
