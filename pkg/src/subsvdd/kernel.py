"""Nonlinear feature construction via the kernel eigendecomposition trick.

An RBF kernel over the training data is double-centered and eigendecomposed,
K_hat = U A U'. Retaining the eigenpairs with lambda > rank_tol * lambda_max
gives an explicit r-dimensional feature map Phi = A_r^{-1/2} U_r' K_hat whose
Gram matrix reproduces K_hat, so the linear subspace machinery runs unchanged
on Phi. Test points are mapped through their (centered) kernel vector against
the stored training set.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonPositiveSigma, NotSymmetric, ZeroKernel
from .numerics import sym_eig

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class NptBasis:
    """Everything needed to map new points into the explicit feature space."""

    phi: np.ndarray  # r x N explicit training features
    u_r: np.ndarray  # N x r retained eigenvectors
    eigvals_r: np.ndarray  # r retained (positive) eigenvalues
    k_train: np.ndarray = field(repr=False)  # original N x N kernel
    sigma: float = 1.0
    train_x: np.ndarray = field(repr=False, default=None)  # D x N original features

    @property
    def rank(self):
        return self.eigvals_r.shape[0]


def _pairwise_sq_dists(x, z):
    xx = (x * x).sum(axis=0)
    zz = (z * z).sum(axis=0)
    d2 = xx[:, None] + zz[None, :] - 2.0 * (x.T @ z)
    return np.maximum(d2, 0.0)


def rbf_kernel(x, sigma):
    """N x N RBF kernel, K_ij = exp(-||x_i - x_j||^2 / (2 sigma^2))."""
    if sigma <= 0.0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma}")
    x_mat = np.asarray(x, dtype=np.float64)
    if x_mat.ndim != 2:
        raise DimensionMismatch("data must be a D x N matrix")
    k = np.exp(-_pairwise_sq_dists(x_mat, x_mat) / (2.0 * sigma * sigma))
    k = 0.5 * (k + k.T)
    np.fill_diagonal(k, 1.0)
    return k


def rbf_kernel_cross(x_train, x_new, sigma):
    """N x M kernel block between training columns and new columns."""
    if sigma <= 0.0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma}")
    a = np.asarray(x_train, dtype=np.float64)
    b = np.asarray(x_new, dtype=np.float64)
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch(
            f"feature dimensions disagree: {a.shape[0]} vs {b.shape[0]}"
        )
    return np.exp(-_pairwise_sq_dists(a, b) / (2.0 * sigma * sigma))


def center_kernel(k):
    """Double centering (I - 11'/N) K (I - 11'/N); removes the feature-space mean."""
    k_mat = np.asarray(k, dtype=np.float64)
    if k_mat.ndim != 2 or k_mat.shape[0] != k_mat.shape[1]:
        raise DimensionMismatch(f"kernel must be square, got {k_mat.shape}")
    if np.abs(k_mat - k_mat.T).max() > 1e-9:
        raise NotSymmetric("kernel matrix is not symmetric")
    row_mean = k_mat.mean(axis=1, keepdims=True)
    total_mean = k_mat.mean()
    return k_mat - row_mean - row_mean.T + total_mean


def npt_fit(k_hat, rank_tol=DEFAULT_RANK_TOL):
    """Eigendecompose the centered kernel and build the explicit feature map.

    Returns (phi, u_r, eigvals_r). Eigenpairs with lambda <= rank_tol *
    lambda_max are dropped (negative eigenvalues always are); ZeroKernel is
    raised when nothing survives.
    """
    k_mat = np.asarray(k_hat, dtype=np.float64)
    eig = sym_eig(k_mat)
    vals, vecs = eig.eigenvalues, eig.eigenvectors
    lam_max = vals[0] if vals.size else 0.0
    if lam_max <= 0.0:
        raise ZeroKernel("centered kernel has no positive eigenvalue")
    keep = vals > rank_tol * lam_max
    vals_r = vals[keep]
    u_r = vecs[:, keep]
    phi = (u_r / np.sqrt(vals_r)).T @ k_mat  # A_r^{-1/2} U_r' K_hat
    return phi, u_r, vals_r


def build_npt(x, sigma, rank_tol=DEFAULT_RANK_TOL):
    """Kernel -> centering -> eigendecomposition pipeline for training data."""
    x_mat = np.asarray(x, dtype=np.float64)
    k = rbf_kernel(x_mat, sigma)
    phi, u_r, vals_r = npt_fit(center_kernel(k), rank_tol=rank_tol)
    return NptBasis(
        phi=phi, u_r=u_r, eigvals_r=vals_r, k_train=k, sigma=float(sigma), train_x=x_mat
    )


def npt_map(x_new, basis: NptBasis):
    """Map a D x M block of new points to the r-dimensional feature space.

    Each column's kernel vector against the training set is centered with the
    training statistics, k_hat* = (I - 11'/N)(k* - K 1/N), then projected
    through the retained eigenbasis: phi* = A_r^{-1/2} U_r' k_hat*.
    """
    pts = np.asarray(x_new, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] != basis.train_x.shape[0]:
        raise DimensionMismatch(
            f"new points {pts.shape} do not match training dimension "
            f"{basis.train_x.shape[0]}"
        )
    k_star = rbf_kernel_cross(basis.train_x, pts, basis.sigma)  # N x M
    v = k_star - basis.k_train.mean(axis=1, keepdims=True)
    k_hat_star = v - v.mean(axis=0, keepdims=True)
    return (basis.u_r / np.sqrt(basis.eigvals_r)).T @ k_hat_star


def npt_map_test(x_star, basis: NptBasis):
    """Single-point convenience wrapper around ``npt_map``."""
    vec = np.asarray(x_star, dtype=np.float64)
    if vec.ndim != 1:
        raise DimensionMismatch("x_star must be a vector")
    return npt_map(vec[:, None], basis)[:, 0]
