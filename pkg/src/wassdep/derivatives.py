"""
Derivatives of ``d1`` and ``d2`` and the asymptotic variance of their plug-in estimators.

Each derivative is represented by a symmetric matrix ``M`` such that the
directional derivative along a symmetric ``H`` is ``trace(M @ H)``. The
representation is only linear when both diagonal blocks have simple spectra,
so degenerate blocks raise ``DegenerateEigenvalues``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .coefficients import CoefficientKind, _ratio, d1_terms, d2_terms
from .coupling import BlockPartition, as_partition, padded_block_spectra
from .errors import DegenerateEigenvalues, DimensionMismatch, KindMismatch
from .linalg import _check_pd, as_symmetric, sqrt_psd, sym_eigen, sym_function

__all__ = [
    "DerivativePack",
    "GAP_TOL",
    "m1_matrix",
    "m2_matrix",
    "derivative_matrix",
    "correlation_adjust",
    "asymptotic_variance",
]

GAP_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DerivativePack:
    """Derivative matrix of a coefficient together with its building blocks.

    Attributes
    ----------
    m : ndarray
        Derivative matrix, symmetric d x d.
    c : float
        Denominator of the coefficient.
    value : float
        The coefficient itself.
    upsilon : ndarray
        Block-diagonal gradient of the denominator's eigenvalue term.
    deltas : tuple of ndarray
        Per-eigenvalue weights used to build ``upsilon`` for each block.
    j, j0 : ndarray or None
        Transport map from ``Sigma0`` to ``Sigma`` and its block-diagonal part
        (``d2`` only).
    """

    m: NDArray[np.float64]
    c: float
    value: float
    upsilon: NDArray[np.float64]
    deltas: tuple[NDArray[np.float64], NDArray[np.float64]]
    j: NDArray[np.float64] | None = None
    j0: NDArray[np.float64] | None = None


def _require_simple_spectrum(values: NDArray[np.float64], label: str, gap_tol: float) -> None:
    if values.size < 2:
        return
    gaps = -np.diff(values)
    rel = gaps / max(abs(values[0]), 1e-300)
    k = int(np.argmin(rel))
    if rel[k] < gap_tol:
        raise DegenerateEigenvalues(
            f"{label} has (nearly) repeated eigenvalues {values[k]:.6g} and {values[k + 1]:.6g}; "
            "the derivative is not linear there"
        )


def _prepare(part, p, q, gap_tol):
    part = as_partition(part, p, q)
    _check_pd(part.eigen, "sigma")
    _require_simple_spectrum(part.eigen1.values, "first block", gap_tol)
    _require_simple_spectrum(part.eigen2.values, "second block", gap_tol)
    return part


def _blockdiag(A: NDArray[np.float64], B: NDArray[np.float64]) -> NDArray[np.float64]:
    p, q = A.shape[0], B.shape[0]
    out = np.zeros((p + q, p + q))
    out[:p, :p] = A
    out[p:, p:] = B
    return out


def _upsilon(part: BlockPartition, w1: NDArray[np.float64], w2: NDArray[np.float64]) -> NDArray[np.float64]:
    U1, U2 = part.eigen1.vectors, part.eigen2.vectors
    return _blockdiag((U1 * w1) @ U1.T, (U2 * w2) @ U2.T)


def m1_matrix(part: BlockPartition | ArrayLike, p: int | None = None, q: int | None = None, gap_tol: float = GAP_TOL) -> DerivativePack:
    """Derivative matrix of ``d1``.

    ``M1 = (-Sigma^{-1/2} + (1 - D1) Sigma0^{-1/2} + D1 Upsilon1) / (2 c1)``
    where ``c1`` is the denominator of ``d1`` and ``Upsilon1`` applies
    ``1 / sqrt(lambda_{j,1} + lambda_{j,2})`` along the block eigenvectors.

    Raises
    ------
    NotPositiveDefinite
        If ``Sigma`` is singular.
    DegenerateEigenvalues
        If a block has repeated eigenvalues (relative gap below ``gap_tol``).
    """
    part = _prepare(part, p, q, gap_tol)
    num, c1 = d1_terms(part)
    l1, l2 = part.eigen1.values, part.eigen2.values
    D = _ratio(num, c1, float(np.sum(np.sqrt(l1)) + np.sum(np.sqrt(l2))), "d1")
    a, b = padded_block_spectra(l1, l2)
    root = np.sqrt(a + b)
    w1, w2 = 1.0 / root[: l1.size], 1.0 / root[: l2.size]

    inv_root = sym_function(part.eigen, lambda w: 1.0 / np.sqrt(w))
    inv_root0 = _blockdiag(sym_function(part.eigen1, lambda w: 1.0 / np.sqrt(w)), sym_function(part.eigen2, lambda w: 1.0 / np.sqrt(w)))
    ups = _upsilon(part, w1, w2)
    M = (-inv_root + (1.0 - D) * inv_root0 + D * ups) / (2.0 * c1)
    return DerivativePack(m=0.5 * (M + M.T), c=float(c1), value=D, upsilon=ups, deltas=(w1, w2))


def m2_matrix(part: BlockPartition | ArrayLike, p: int | None = None, q: int | None = None, gap_tol: float = GAP_TOL) -> DerivativePack:
    """Derivative matrix of ``d2``.

    ``M2 = (-(J0 + J^{-1}) / 2 + (1 - D2) I + D2 Upsilon2) / c2`` where ``J``
    is the positive definite solution of ``J Sigma0 J = Sigma``, ``J0`` its
    block-diagonal part, ``c2`` the denominator of ``d2``, and ``Upsilon2``
    applies ``lambda_{j,k} / sqrt(lambda_{j,1}^2 + lambda_{j,2}^2)`` along the
    eigenvectors of block k.
    """
    part = _prepare(part, p, q, gap_tol)
    r0 = _blockdiag(sqrt_psd(part.eigen1), sqrt_psd(part.eigen2))
    ir0 = _blockdiag(sym_function(part.eigen1, lambda w: 1.0 / np.sqrt(w)), sym_function(part.eigen2, lambda w: 1.0 / np.sqrt(w)))
    P = r0 @ part.sigma @ r0
    eP = sym_eigen(0.5 * (P + P.T))
    _check_pd(eP, "Sigma0^{1/2} Sigma Sigma0^{1/2}")
    kappa = eP.values
    J = ir0 @ sym_function(eP, np.sqrt) @ ir0
    J_inv = r0 @ sym_function(eP, lambda w: 1.0 / np.sqrt(w)) @ r0
    J = 0.5 * (J + J.T)
    J_inv = 0.5 * (J_inv + J_inv.T)
    J0 = _blockdiag(J[: part.p, : part.p], J[part.p :, part.p :])

    num, c2 = d2_terms(part, kappa)
    D = _ratio(num, c2, float(np.trace(part.sigma)), "d2")
    l1, l2 = part.eigen1.values, part.eigen2.values
    a, b = padded_block_spectra(l1, l2)
    h = np.hypot(a, b)
    w1, w2 = a[: l1.size] / h[: l1.size], b[: l2.size] / h[: l2.size]
    ups = _upsilon(part, w1, w2)
    M = (-0.5 * (J0 + J_inv) + (1.0 - D) * np.eye(part.d) + D * ups) / c2
    return DerivativePack(m=0.5 * (M + M.T), c=float(c2), value=D, upsilon=ups, deltas=(w1, w2), j=J, j0=J0)


def derivative_matrix(kind: CoefficientKind | str, part: BlockPartition | ArrayLike, p: int | None = None, q: int | None = None, gap_tol: float = GAP_TOL) -> DerivativePack:
    kind = CoefficientKind.parse(kind)
    if kind is CoefficientKind.D1:
        return m1_matrix(part, p, q, gap_tol)
    if kind is CoefficientKind.D2:
        return m2_matrix(part, p, q, gap_tol)
    raise KindMismatch(f"no derivative is available for {kind.value}")


def correlation_adjust(R: ArrayLike, M: ArrayLike) -> NDArray[np.float64]:
    """Derivative matrix of ``Sigma -> f(cov_to_corr(Sigma))`` at a correlation matrix.

    Given the derivative matrix ``M`` of ``f`` at ``R``, returns
    ``M - diag(diag(M @ R))``.
    """
    R = as_symmetric(R)
    M = as_symmetric(M)
    if R.shape != M.shape:
        raise DimensionMismatch(f"R has shape {R.shape} but M has shape {M.shape}")
    return M - np.diag(np.einsum("ij,ji->i", M, R))


def asymptotic_variance(R: BlockPartition | ArrayLike, p: int | None = None, q: int | None = None, kind: CoefficientKind | str = CoefficientKind.D1, gap_tol: float = GAP_TOL) -> float:
    """Asymptotic variance of the plug-in estimator of ``d1`` or ``d2``.

    Applies to the empirical correlation matrix of Gaussian data and to the
    normal-scores rank correlation matrix under a Gaussian copula. With
    ``K = correlation_adjust(R, M)`` the variance is ``2 trace((R K)^2)``.
    """
    part = as_partition(R, p, q)
    pack = derivative_matrix(kind, part, gap_tol=gap_tol)
    K = correlation_adjust(part.sigma, pack.m)
    RK = part.sigma @ K
    return max(2.0 * float(np.sum(RK * RK.T)), 0.0)
