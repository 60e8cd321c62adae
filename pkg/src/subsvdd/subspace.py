"""Joint optimization of a linear projection and an SVDD description.

The projection Q (d x D, row-orthonormal) is updated iteratively: solve the
SVDD dual in the current subspace, then move Q along the gradient of the
augmented objective

    L(Q) = sum_i a_i x_i'Q'Qx_i - sum_ij a_i a_j x_i'Q'Qx_j + beta * Psi(Q)

with Psi = Tr(Q X lam lam' X' Q'), either directly (gradient optimizer) or
preconditioned by the Hessian (newton optimizer). Under row-major
vectorization the Hessian is block diagonal, H = I_d kron B with
B = 2 X (diag(a) - aa' + w * lam lam') X', so the Newton solve reduces to d
independent D x D systems. After every update Q is re-orthonormalized (QR)
and row-normalized.

The Hessian weight w on lam lam' is configurable: ``as_written`` uses w = 1
and ``consistent`` uses w = beta (matching the gradient, in which case the
exact Newton step collapses to Q itself whenever B is nonsingular).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSubspace,
    DimensionMismatch,
    InfeasibleC,
    RankDeficient,
    TooLarge,
)
from .numerics import damped_pinv_factor, qr_orthonormalize_rows, row_normalize_l2
from .svdd import SV_EPS_FACTOR, AlphaVector, DataDescription, describe, solve_dual

REG_KINDS = ("psi0", "psi1", "psi2", "psi3")
DIRECTIONS = ("min", "max")
OPTIMIZERS = ("gradient", "newton")
HESSIAN_BETA_MODES = ("as_written", "consistent")

HESSIAN_FULL_CAP = 2500  # hard cap on d*D for the brute-force assembly


@dataclass(frozen=True)
class RegularizationSpec:
    """Which weight vector lam the regularizer uses, and its strength."""

    kind: str
    beta: float
    boundary_eps: float

    def __post_init__(self):
        if self.kind not in REG_KINDS:
            raise ValueError(f"unknown regularization kind {self.kind!r}")
        if self.beta < 0.0:
            raise ValueError("beta must be >= 0")


@dataclass(frozen=True)
class TrainConfig:
    """All knobs of one training run. ``seed`` drives the Q initialization."""

    d: int
    C: float
    beta: float = 1.0
    eta: float = 0.01
    reg_kind: str = "psi2"
    direction: str = "min"
    optimizer: str = "newton"
    k_max: int = 100
    seed: int = 42
    hessian_beta_mode: str = "as_written"
    damping: float = 0.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.reg_kind not in REG_KINDS:
            raise ValueError(f"unknown regularization kind {self.reg_kind!r}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")
        if self.hessian_beta_mode not in HESSIAN_BETA_MODES:
            raise ValueError(f"hessian_beta_mode must be one of {HESSIAN_BETA_MODES}")
        if self.damping < 0.0:
            raise ValueError("damping must be >= 0")


@dataclass(frozen=True)
class ProjectionState:
    """Current projection matrix plus where the optimizer stands."""

    q: np.ndarray
    iteration: int
    direction: str


@dataclass(frozen=True)
class TraceRow:
    """One per-iteration record: objective, optional eval score, QQ' deviation."""

    iteration: int
    objective: float
    gmean: float | None
    orth_error: float


@dataclass(frozen=True)
class SubspaceFit:
    """Result of ``train``: final projection, description, projected data, trace."""

    q: np.ndarray
    description: DataDescription
    y_train: np.ndarray
    trace: list[TraceRow] = field(repr=False)


def project(q, x):
    """Map data columns to the subspace: column i of the result is Q x_i."""
    q_mat = np.asarray(q, dtype=np.float64)
    x_mat = np.asarray(x, dtype=np.float64)
    if q_mat.ndim != 2 or x_mat.ndim != 2 or q_mat.shape[1] != x_mat.shape[0]:
        raise DimensionMismatch(f"cannot project {x_mat.shape} through {q_mat.shape}")
    return q_mat @ x_mat


def build_lambda(spec: RegularizationSpec, alpha: AlphaVector):
    """Per-sample weights of the regularization term for the given alpha."""
    a = alpha.alpha
    if spec.kind == "psi0":
        return np.zeros_like(a)
    if spec.kind == "psi1":
        return np.ones_like(a)
    if spec.kind == "psi2":
        return a.copy()
    lam = np.where(
        (a > spec.boundary_eps) & (a < alpha.C - spec.boundary_eps), a, 0.0
    )
    return lam


def _core_matrix(alpha_values, lam, weight):
    """M = diag(a) - aa' + weight * lam lam' (N x N)."""
    return (
        np.diag(alpha_values)
        - np.outer(alpha_values, alpha_values)
        + weight * np.outer(lam, lam)
    )


def objective(q, x, alpha_values, lam, beta):
    """Augmented objective L(Q); reduces to the dual value when beta*Psi = 0."""
    y = project(q, x)
    a = np.asarray(alpha_values, dtype=np.float64)
    lam_v = np.asarray(lam, dtype=np.float64)
    if a.shape[0] != y.shape[1] or lam_v.shape[0] != y.shape[1]:
        raise DimensionMismatch("alpha/lambda length does not match sample count")
    ya = y @ a
    yl = y @ lam_v
    sq_norms = (y * y).sum(axis=0)
    return float(a @ sq_norms - ya @ ya + beta * (yl @ yl))


def gradient(q, x, alpha_values, lam, beta):
    """Gradient of L with respect to Q: 2 Q X (diag(a) - aa' + beta*lam lam') X'."""
    y = project(q, x)
    a = np.asarray(alpha_values, dtype=np.float64)
    lam_v = np.asarray(lam, dtype=np.float64)
    if a.shape[0] != y.shape[1] or lam_v.shape[0] != y.shape[1]:
        raise DimensionMismatch("alpha/lambda length does not match sample count")
    x_mat = np.asarray(x, dtype=np.float64)
    xa = x_mat @ a
    xl = x_mat @ lam_v
    return 2.0 * (
        (y * a) @ x_mat.T - np.outer(y @ a, xa) + beta * np.outer(y @ lam_v, xl)
    )


def hessian_core(x, alpha_values, lam, beta, mode="as_written"):
    """The D x D block B of the Hessian; the full Hessian is I_d kron B.

    ``as_written`` weights lam lam' by 1; ``consistent`` weights it by beta so
    that B is the true second derivative of the beta-weighted objective.
    """
    if mode not in HESSIAN_BETA_MODES:
        raise ValueError(f"mode must be one of {HESSIAN_BETA_MODES}")
    x_mat = np.asarray(x, dtype=np.float64)
    a = np.asarray(alpha_values, dtype=np.float64)
    lam_v = np.asarray(lam, dtype=np.float64)
    if x_mat.ndim != 2 or a.shape[0] != x_mat.shape[1] or lam_v.shape[0] != x_mat.shape[1]:
        raise DimensionMismatch("alpha/lambda length does not match sample count")
    weight = 1.0 if mode == "as_written" else beta
    g = x_mat @ _core_matrix(a, lam_v, weight) @ x_mat.T
    # g + g' supplies the factor 2 and scrubs the (tiny) numerical asymmetry
    # of the matrix product, keeping B bitwise symmetric
    return g + g.T


def hessian_full(x, alpha_values, lam, beta, mode, d):
    """Brute-force dD x dD Hessian via literal structure-matrix assembly.

    Entry ((i,j),(k,l)) is 2 tr[X M X' (S^ij)' S^kl] with S^ij the single-entry
    d x D matrix. Testing oracle only; refuses d*D > HESSIAN_FULL_CAP.
    """
    x_mat = np.asarray(x, dtype=np.float64)
    big_d = x_mat.shape[0]
    if d * big_d > HESSIAN_FULL_CAP:
        raise TooLarge(f"d*D = {d * big_d} exceeds cap {HESSIAN_FULL_CAP}")
    weight = 1.0 if mode == "as_written" else beta
    a = np.asarray(alpha_values, dtype=np.float64)
    lam_v = np.asarray(lam, dtype=np.float64)
    g_mat = x_mat @ _core_matrix(a, lam_v, weight) @ x_mat.T
    g_mat = 0.5 * (g_mat + g_mat.T)  # X M X' is symmetric; enforce it exactly
    n_flat = d * big_d
    h_full = np.empty((n_flat, n_flat))
    for i in range(d):
        for j in range(big_d):
            s_ij = np.zeros((d, big_d))
            s_ij[i, j] = 1.0
            row = i * big_d + j
            for k in range(d):
                for l_col in range(big_d):
                    s_kl = np.zeros((d, big_d))
                    s_kl[k, l_col] = 1.0
                    h_full[row, k * big_d + l_col] = 2.0 * np.trace(
                        g_mat @ s_ij.T @ s_kl
                    )
    return h_full


def newton_step(grad, b, mu=0.0, rel_tol=1e-10):
    """Solve B s_r = g_r for every row r of the gradient (H = I_d kron B).

    One factorization of B serves all rows; the result equals calling
    solve_damped per row.
    """
    g_mat = np.asarray(grad, dtype=np.float64)
    u, inv = damped_pinv_factor(np.asarray(b, dtype=np.float64), mu=mu, rel_tol=rel_tol)
    return (g_mat @ u) * inv @ u.T


def apply_update(q, step, eta, direction):
    """Raw (pre-orthonormalization) update: Q - eta*step (min) or + (max)."""
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    sign = -1.0 if direction == "min" else 1.0
    return q + sign * eta * step


def _finalize(q_raw):
    return row_normalize_l2(qr_orthonormalize_rows(q_raw))


def update_step(state: ProjectionState, grad, b, cfg: TrainConfig):
    """One optimizer step followed by QR orthonormalization and row normalization.

    Propagates RankDeficient when the updated matrix loses row rank; ``train``
    recovers from that by redrawing the offending rows.
    """
    if cfg.optimizer == "newton":
        step = newton_step(grad, b, mu=cfg.damping)
    else:
        step = grad
    q_raw = apply_update(state.q, step, cfg.eta, cfg.direction)
    return ProjectionState(
        q=_finalize(q_raw), iteration=state.iteration + 1, direction=cfg.direction
    )


def _orthonormalize_with_recovery(q_raw, rng, max_redraws=3):
    """Finalize q_raw, redrawing rows the QR flags as dependent (at most 3 times)."""
    attempt = q_raw
    for _ in range(max_redraws):
        try:
            return _finalize(attempt)
        except RankDeficient as exc:
            rows = exc.rows if exc.rows else range(attempt.shape[0])
            attempt = attempt.copy()
            for r in rows:
                attempt[r] = rng.standard_normal(attempt.shape[1])
    try:
        return _finalize(attempt)
    except RankDeficient as exc:
        raise DegenerateSubspace(
            f"projection stayed rank-deficient after {max_redraws} redraws"
        ) from exc


def init_projection(d, big_d, rng):
    """Seeded Gaussian init followed by orthonormalize + row normalize."""
    return _orthonormalize_with_recovery(rng.standard_normal((d, big_d)), rng)


def train(x, cfg: TrainConfig, eval_fn=None, q0=None):
    """Run the full iterative optimization and describe the final subspace.

    ``x`` is D x N training data (one column per sample). The loop runs while
    k < k_max, so k_max = 1 performs no update and describes the randomly
    initialized subspace. The trace holds one row per iteration k = 1..k_max
    (objective of the current subspace and, when ``eval_fn`` is given, its
    score); the final row belongs to the returned model.

    ``eval_fn(q, desc, y, alpha) -> float`` may be attached to score each
    iteration's model on held-out data. ``q0`` overrides the seeded random
    initialization (it is re-orthonormalized), used for equivariance studies.
    """
    x_mat = np.asarray(x, dtype=np.float64)
    if x_mat.ndim != 2:
        raise DimensionMismatch("training data must be a D x N matrix")
    big_d, n = x_mat.shape
    if n < 2:
        raise DimensionMismatch("need at least 2 training samples")
    if cfg.d > big_d:
        raise DimensionMismatch(f"subspace dimension {cfg.d} exceeds data dimension {big_d}")
    if cfg.C * n < 1.0 - 1e-9:
        raise InfeasibleC(f"C = {cfg.C} < 1/N = {1.0 / n}")

    rng = np.random.default_rng(cfg.seed)
    if q0 is None:
        q = init_projection(cfg.d, big_d, rng)
    else:
        q = _orthonormalize_with_recovery(np.asarray(q0, dtype=np.float64), rng)

    reg = RegularizationSpec(
        kind=cfg.reg_kind, beta=cfg.beta, boundary_eps=SV_EPS_FACTOR * cfg.C
    )
    trace: list[TraceRow] = []

    def record(k, q_now, alpha, y):
        obj = objective(q_now, x_mat, alpha.alpha, build_lambda(reg, alpha), cfg.beta)
        score = None
        if eval_fn is not None:
            score = eval_fn(q_now, describe(alpha, y), y, alpha)
        orth = float(np.abs(q_now @ q_now.T - np.eye(cfg.d)).max())
        trace.append(TraceRow(iteration=k, objective=obj, gmean=score, orth_error=orth))

    k = 1
    warm = None
    while k < cfg.k_max:
        y = project(q, x_mat)
        alpha = solve_dual(y.T @ y, cfg.C, alpha0=warm)
        warm = alpha.alpha
        record(k, q, alpha, y)
        lam = build_lambda(reg, alpha)
        grad = gradient(q, x_mat, alpha.alpha, lam, cfg.beta)
        if cfg.optimizer == "newton":
            step = newton_step(
                grad, hessian_core(x_mat, alpha.alpha, lam, cfg.beta, cfg.hessian_beta_mode),
                mu=cfg.damping,
            )
        else:
            step = grad
        q = _orthonormalize_with_recovery(
            apply_update(q, step, cfg.eta, cfg.direction), rng
        )
        k += 1

    y = project(q, x_mat)
    alpha = solve_dual(y.T @ y, cfg.C, alpha0=warm)
    record(cfg.k_max, q, alpha, y)
    desc = describe(alpha, y)
    return SubspaceFit(q=q, description=desc, y_train=y, trace=trace)
