"""SVDD in a fixed feature space: dual solver, hypersphere description, decisions.

The dual maximizes sum_i a_i G_ii - sum_ij a_i G_ij a_j over the simplex
sum(a) = 1 with box 0 <= a_i <= C, where G is the Gram matrix of the
(projected) training data. The solver is a deterministic pairwise coordinate
exchange: the pair most violating the KKT conditions is updated by the
closed-form 2-variable solution, clipped to the box. On apparent convergence
a full pairwise sweep certifies that no feasible exchange improves the
objective by more than ``tol``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InfeasibleC,
    NoSupportVectors,
    NotConverged,
)

# alpha_i counts as a support vector when alpha_i > SV_EPS_FACTOR * C, and as
# a boundary support vector when additionally alpha_i < C - SV_EPS_FACTOR * C.
SV_EPS_FACTOR = 1e-6


@dataclass(frozen=True)
class AlphaVector:
    """Dual solution: simplex weights alpha with box bound C."""

    alpha: np.ndarray
    C: float

    def validate(self, tol=1e-8):
        a = self.alpha
        if abs(a.sum() - 1.0) > tol:
            raise ValueError(f"sum(alpha) = {a.sum()!r}, expected 1")
        if a.min() < -tol or a.max() > self.C + tol:
            raise ValueError("alpha outside [0, C]")


@dataclass(frozen=True)
class DataDescription:
    """Trained hypersphere: center, squared radius and support-vector index sets."""

    alpha: AlphaVector
    center: np.ndarray
    radius_sq: float
    sv_indices: np.ndarray = field(repr=False)
    boundary_sv_indices: np.ndarray = field(repr=False)


def dual_objective(gram, alpha):
    """Value of the dual objective at alpha (used by the solver and its tests)."""
    return float(np.dot(alpha, np.diag(gram)) - alpha @ gram @ alpha)


def _pair_sweep(diag, gram, alpha, grad, C):
    """Best feasible pairwise exchange: returns (i, j, t, improvement).

    For the ordered pair (i, j), mass t >= 0 moves from j to i; the gain of
    the optimal clipped step is num*t - den*t^2 with num = grad_i - grad_j
    and den = G_ii + G_jj - 2 G_ij (>= 0 for PSD G). Only positive directions
    are scanned; the reversed pair covers the other sign.
    """
    num = grad[:, None] - grad[None, :]
    den = diag[:, None] + diag[None, :] - 2.0 * gram
    t_hi = np.minimum(alpha[None, :], C - alpha[:, None])
    t, gain = _best_partner_gains(num, den, t_hi)
    np.fill_diagonal(gain, 0.0)
    flat = int(np.argmax(gain))
    i, j = divmod(flat, alpha.shape[0])
    return i, j, float(t[i, j]), float(gain[i, j])


def _best_partner_gains(num, den, t_hi):
    """Vectorized optimal clipped step and gain for a family of pairs.

    den <= 0 (numerically) degrades the subproblem to a linear one, where the
    optimal move is the full boundary step; flooring den makes the exact
    quotient land beyond t_hi and clip to it without special cases.
    """
    t_hi = np.maximum(t_hi, 0.0)
    t = np.minimum(np.maximum(num / (2.0 * np.maximum(den, 1e-30)), 0.0), t_hi)
    t[num <= 0.0] = 0.0
    return t, num * t - den * t * t


def solve_dual(gram, C, tol=None, max_passes=None, alpha0=None):
    """Solve the SVDD dual for Gram matrix ``gram`` and box bound ``C``.

    Deterministic for fixed inputs. ``tol`` is the KKT residual: at return no
    feasible pairwise exchange improves the objective by more than tol. The
    default, 1e-12 * max(1, max G_ii), is far tighter than the documented
    1e-6 bound so that boundary support vectors agree with the radius to
    ~1e-6 relative. ``alpha0`` warm-starts the iteration when it is already
    feasible (the iterative trainer passes the previous alpha). Raises
    InfeasibleC when C < 1/N and NotConverged when the criterion is not met
    within ``max_passes`` pair updates (default 10*N^2).
    """
    g_mat = np.asarray(gram, dtype=np.float64)
    if g_mat.ndim != 2 or g_mat.shape[0] != g_mat.shape[1]:
        raise DimensionMismatch(f"Gram matrix must be square, got {g_mat.shape}")
    n = g_mat.shape[0]
    if n == 0:
        raise DimensionMismatch("empty Gram matrix")
    c_bound = float(C)
    if c_bound * n < 1.0 - 1e-9:
        raise InfeasibleC(f"C = {c_bound} < 1/N = {1.0 / n}")
    if n == 1:
        return AlphaVector(alpha=np.array([1.0]), C=c_bound)
    if max_passes is None:
        max_passes = 10 * n * n

    g_mat = 0.5 * (g_mat + g_mat.T)
    diag = np.diag(g_mat).copy()
    if tol is None:
        tol = 1e-12 * max(1.0, float(np.abs(diag).max()))
    alpha = np.full(n, 1.0 / n)
    if alpha0 is not None:
        cand = np.asarray(alpha0, dtype=np.float64)
        if (
            cand.shape == (n,)
            and abs(cand.sum() - 1.0) < 1e-9
            and cand.min() >= 0.0
            and cand.max() <= c_bound + 1e-15
        ):
            alpha = np.clip(cand, 0.0, c_bound)
    h = g_mat @ alpha  # cached G @ alpha
    updates = 0
    while True:
        grad = diag - 2.0 * h
        up = alpha < c_bound
        dn = alpha > 0.0
        i = j = -1
        t = gain = 0.0
        if up.any() and dn.any():
            # fix the most promising index on each side by gradient, then pick
            # its partner by the actual gain of the clipped 2-variable step
            i0 = int(np.argmax(np.where(up, grad, -np.inf)))
            num_j = grad[i0] - grad
            den_j = diag[i0] + diag - 2.0 * g_mat[:, i0]
            t_j, gain_j = _best_partner_gains(
                num_j, den_j, np.minimum(alpha, c_bound - alpha[i0])
            )
            gain_j[~dn] = -np.inf
            gain_j[i0] = -np.inf
            j0 = int(np.argmax(gain_j))

            j1 = int(np.argmin(np.where(dn, grad, np.inf)))
            num_i = grad - grad[j1]
            den_i = diag + diag[j1] - 2.0 * g_mat[:, j1]
            t_i, gain_i = _best_partner_gains(
                num_i, den_i, np.minimum(alpha[j1], c_bound - alpha)
            )
            gain_i[~up] = -np.inf
            gain_i[j1] = -np.inf
            i1 = int(np.argmax(gain_i))

            if gain_j[j0] >= gain_i[i1]:
                i, j, t, gain = i0, j0, float(t_j[j0]), float(gain_j[j0])
            else:
                i, j, t, gain = i1, j1, float(t_i[i1]), float(gain_i[i1])

        if gain <= tol:
            # working-set selection stalled: refresh the cache and certify
            # against every pair before declaring convergence
            h = g_mat @ alpha
            grad = diag - 2.0 * h
            i, j, t, gain = _pair_sweep(diag, g_mat, alpha, grad, c_bound)
            if gain <= tol:
                break

        old_i, old_j = alpha[i], alpha[j]
        total = old_i + old_j
        alpha[i] = min(max(old_i + t, 0.0), c_bound)
        alpha[j] = total - alpha[i]
        if alpha[j] < 0.0:
            alpha[j] = 0.0
            alpha[i] = total
        elif alpha[j] > c_bound:
            alpha[j] = c_bound
            alpha[i] = total - c_bound
        h += g_mat[:, i] * (alpha[i] - old_i) + g_mat[:, j] * (alpha[j] - old_j)
        updates += 1
        if updates > max_passes:
            raise NotConverged(
                f"KKT residual above {tol} after {max_passes} pair updates"
            )

    return AlphaVector(alpha=alpha, C=c_bound)


def describe(alpha: AlphaVector, y):
    """Build the hypersphere description from the dual solution.

    ``y`` holds the projected training data, one column per sample. The
    squared radius is the mean squared distance of the boundary support
    vectors to the center; when no boundary support vector exists it falls
    back to the maximum over all support vectors.
    """
    y_mat = np.asarray(y, dtype=np.float64)
    a = alpha.alpha
    if y_mat.ndim != 2 or y_mat.shape[1] != a.shape[0]:
        raise DimensionMismatch(
            f"projected data {y_mat.shape} does not match alpha length {a.shape[0]}"
        )
    eps = SV_EPS_FACTOR * alpha.C
    sv = np.nonzero(a > eps)[0]
    if sv.size == 0:
        raise NoSupportVectors("all alpha_i below the support-vector threshold")
    boundary = sv[a[sv] < alpha.C - eps]
    center = y_mat @ a
    dist_sq = ((y_mat - center[:, None]) ** 2).sum(axis=0)
    if boundary.size:
        radius_sq = float(dist_sq[boundary].mean())
    else:
        radius_sq = float(dist_sq[sv].max())
    return DataDescription(
        alpha=alpha,
        center=center,
        radius_sq=radius_sq,
        sv_indices=sv,
        boundary_sv_indices=boundary,
    )


def decide(y_star, desc: DataDescription, y_train, alpha: AlphaVector):
    """Classify one point by its squared distance to the description center.

    The distance is computed through the Gram expansion
    y*'y* - 2 sum_i a_i y*'y_i + sum_ij a_i a_j y_i'y_j, so only inner
    products with the training data are needed. Returns (distance_sq,
    positive) with positive True iff distance_sq <= radius_sq.
    """
    dist, pos = decide_batch(np.asarray(y_star, dtype=np.float64)[:, None], desc, y_train, alpha)
    return float(dist[0]), bool(pos[0])


def decide_batch(y_new, desc: DataDescription, y_train, alpha: AlphaVector):
    """Vectorized ``decide`` for a d x M block of points."""
    y_mat = np.asarray(y_train, dtype=np.float64)
    pts = np.asarray(y_new, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] != y_mat.shape[0]:
        raise DimensionMismatch(
            f"test block {pts.shape} does not match training dimension {y_mat.shape[0]}"
        )
    a = alpha.alpha
    if y_mat.shape[1] != a.shape[0]:
        raise DimensionMismatch("training data and alpha disagree on N")
    ya = y_mat @ a
    const = float(a @ (y_mat.T @ ya))  # sum_ij a_i a_j y_i'y_j
    dist_sq = (pts * pts).sum(axis=0) - 2.0 * (pts.T @ ya) + const
    return dist_sq, dist_sq <= desc.radius_sq
