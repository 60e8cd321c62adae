"""Dense linear-algebra primitives used by the rest of the package.

Matrices are C-ordered float64 ndarrays; vectorizing a matrix always means
row-major order (``reshape(-1)``), i.e. entry (i, j) of an r x c matrix lands
at flat index i*c + j. All functions are pure and reject NaN/Inf inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotSymmetric, RankDeficient, ZeroRow

RANK_TOL = 1e-12
SYM_TOL = 1e-9


def as_matrix(m, name="matrix"):
    """Validate and return a finite 2-D float64 array."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf")
    return a


def qr_orthonormalize_rows(m):
    """Orthonormalize the rows of a d x D matrix (d <= D) via QR of its transpose.

    The row space is preserved. QR sign freedom is fixed deterministically:
    each output row is flipped so that its entry of largest magnitude (first
    such entry on ties) is non-negative.

    Raises RankDeficient when the numerical row rank is below d; the exception
    carries the offending row indices (those whose R diagonal collapsed).
    """
    a = as_matrix(m, "m")
    d, big_d = a.shape
    if d > big_d:
        raise DimensionMismatch(f"need d <= D, got {d}x{big_d}")
    q, r = np.linalg.qr(a.T)  # q: D x d, r: d x d
    diag = np.abs(np.diag(r))
    tol = RANK_TOL * diag.max() if diag.size else 0.0
    bad = np.nonzero(diag < tol)[0]
    if diag.size and (bad.size or diag.max() == 0.0):
        if not bad.size:
            bad = np.arange(d)
        raise RankDeficient(
            f"numerical row rank < {d} (rows {bad.tolist()} dependent)", rows=bad.tolist()
        )
    out = q.T.copy()
    for i in range(d):
        j = int(np.argmax(np.abs(out[i])))
        if out[i, j] < 0.0:
            out[i] = -out[i]
    return out


def row_normalize_l2(m):
    """Scale every row to unit Euclidean norm. Raises ZeroRow on a ~zero row."""
    a = as_matrix(m, "m")
    norms = np.linalg.norm(a, axis=1)
    if np.any(norms < 1e-15):
        bad = np.nonzero(norms < 1e-15)[0]
        raise ZeroRow(f"rows {bad.tolist()} have (near-)zero norm")
    return a / norms[:, None]


@dataclass(frozen=True)
class EigDecomposition:
    """Symmetric eigendecomposition with eigenvalues sorted descending."""

    eigenvalues: np.ndarray  # shape (n,), descending
    eigenvectors: np.ndarray  # shape (n, n), columns match eigenvalues


def sym_eig(s):
    """Eigendecompose a symmetric matrix, eigenvalues descending.

    Input asymmetry up to SYM_TOL is tolerated and symmetrized away (centered
    kernels pick up ~1e-15 asymmetry from floating point); larger asymmetry
    raises NotSymmetric.
    """
    a = as_matrix(s, "s")
    n, n2 = a.shape
    if n != n2:
        raise DimensionMismatch(f"expected square matrix, got {n}x{n2}")
    asym = np.abs(a - a.T).max() if n else 0.0
    if asym > SYM_TOL:
        raise NotSymmetric(f"max asymmetry {asym:.3e} exceeds {SYM_TOL:.1e}")
    sym = 0.5 * (a + a.T)
    vals, vecs = np.linalg.eigh(sym)
    order = np.argsort(vals)[::-1]
    return EigDecomposition(eigenvalues=vals[order], eigenvectors=vecs[:, order])


def pinv(m, rel_tol=1e-10):
    """Moore-Penrose pseudo-inverse, dropping singular values < rel_tol * sigma_max."""
    a = as_matrix(m, "m")
    if rel_tol <= 0.0:
        raise ValueError("rel_tol must be positive")
    return np.linalg.pinv(a, rcond=rel_tol)


def damped_pinv_factor(h, mu=0.0, rel_tol=1e-10):
    """Factor (H + mu*I)^+ for symmetric H as (U, inv_eigenvalues).

    Eigenvalues of the damped matrix with |lambda + mu| below
    rel_tol * max|lambda + mu| are inverted to zero, so a singular (or
    indefinite) H is handled without error. Applying the factor to a vector g
    as U (inv * (U' g)) gives the minimum-norm least-squares solution of
    (H + mu*I) x = g.
    """
    if mu < 0.0:
        raise ValueError("mu must be >= 0")
    eig = sym_eig(h)
    lam = eig.eigenvalues + mu
    scale = np.abs(lam).max() if lam.size else 0.0
    inv = np.zeros_like(lam)
    if scale > 0.0:
        keep = np.abs(lam) >= rel_tol * scale
        inv[keep] = 1.0 / lam[keep]
    return eig.eigenvectors, inv


def solve_damped(h, g, mu=0.0, rel_tol=1e-10):
    """Minimum-norm least-squares solve of (H + mu*I) x = g for symmetric H."""
    a = as_matrix(h, "h")
    rhs = np.asarray(g, dtype=np.float64)
    if rhs.ndim != 1 or rhs.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"rhs length {rhs.shape} does not match H {a.shape}")
    u, inv = damped_pinv_factor(a, mu=mu, rel_tol=rel_tol)
    return u @ (inv * (u.T @ rhs))
