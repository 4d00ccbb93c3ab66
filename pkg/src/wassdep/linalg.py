"""
Dense symmetric-matrix primitives.

Matrix functions (square roots, inverse square roots) go through the
eigendecomposition of the argument; the matrices handled here are small
(d up to a few hundred) so the direct route is preferred over iterations.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .errors import (
    DimensionMismatch,
    IterationFailure,
    NotFinite,
    NotPositiveDefinite,
    NotPositiveSemidefinite,
    NotSymmetric,
)

__all__ = [
    "EigenSystem",
    "as_symmetric",
    "sym_eigen",
    "sym_function",
    "sqrt_psd",
    "inv_sqrt_pd",
    "psd_tolerance",
    "bures_wasserstein_sq",
    "bures_transport",
    "frechet_sqrt",
    "frechet_bures",
]

SYMMETRY_TOL = 1e-10


class EigenSystem(NamedTuple):
    """Eigenvalues in descending order and matching orthonormal eigenvectors (columns)."""

    values: NDArray[np.float64]
    vectors: NDArray[np.float64]

    def reconstruct(self) -> NDArray[np.float64]:
        return (self.vectors * self.values) @ self.vectors.T


def as_symmetric(A: ArrayLike, tol: float = SYMMETRY_TOL) -> NDArray[np.float64]:
    """Validate a square, finite, symmetric matrix and return an exactly symmetric copy.

    Asymmetry up to ``tol * (1 + max|A|)`` is treated as roundoff and removed
    by averaging with the transpose.
    """
    A = np.array(A, dtype=np.float64, ndmin=2)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NotFinite("matrix contains NaN or Inf entries")
    gap = np.abs(A - A.T)
    k = int(np.argmax(gap))
    worst = gap.flat[k]
    if worst > tol * (1.0 + np.max(np.abs(A))):
        i, j = divmod(k, A.shape[0])
        raise NotSymmetric(min(i, j), max(i, j), float(worst))
    return 0.5 * (A + A.T)


def sym_eigen(A: ArrayLike) -> EigenSystem:
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues are sorted in descending order. Each eigenvector is signed so
    that its entry of largest magnitude is positive, which makes the output
    reproducible across LAPACK builds.
    """
    A = as_symmetric(A)
    try:
        w, U = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise IterationFailure(f"eigensolver did not converge: {exc}") from exc
    w = w[::-1].copy()
    U = U[:, ::-1].copy()
    if U.size:
        idx = np.argmax(np.abs(U), axis=0)
        signs = np.sign(U[idx, np.arange(U.shape[1])])
        signs[signs == 0] = 1.0
        U *= signs
    return EigenSystem(w, U)


def psd_tolerance(values: NDArray[np.float64]) -> float:
    """Scale-relative tolerance used both for PSD admission and strict PD checks."""
    top = float(np.max(np.abs(values))) if values.size else 0.0
    return 1e-10 * (1.0 + top)


def _check_psd(es: EigenSystem, what: str = "matrix") -> NDArray[np.float64]:
    tol = psd_tolerance(es.values)
    if es.values.size and es.values[-1] < -tol:
        raise NotPositiveSemidefinite(
            f"{what} is not positive semi-definite: smallest eigenvalue {es.values[-1]:.3g}"
        )
    return np.clip(es.values, 0.0, None)


def _check_pd(es: EigenSystem, what: str = "matrix") -> NDArray[np.float64]:
    tol = psd_tolerance(es.values)
    if es.values.size and es.values[-1] <= tol:
        raise NotPositiveDefinite(
            f"{what} is not positive definite: smallest eigenvalue {es.values[-1]:.3g}"
        )
    return es.values


def sym_function(
    A: ArrayLike | EigenSystem, f: Callable[[NDArray[np.float64]], NDArray[np.float64]]
) -> NDArray[np.float64]:
    """Apply a scalar function to the spectrum of a symmetric matrix."""
    es = A if isinstance(A, EigenSystem) else sym_eigen(A)
    out = (es.vectors * f(es.values)) @ es.vectors.T
    return 0.5 * (out + out.T)


def sqrt_psd(A: ArrayLike | EigenSystem) -> NDArray[np.float64]:
    """Principal square root of a positive semi-definite matrix.

    Eigenvalues within ``psd_tolerance`` below zero are clamped to zero.

    Raises
    ------
    NotPositiveSemidefinite
        If the smallest eigenvalue is below ``-psd_tolerance``.
    """
    es = A if isinstance(A, EigenSystem) else sym_eigen(A)
    w = _check_psd(es)
    return sym_function(EigenSystem(w, es.vectors), np.sqrt)


def inv_sqrt_pd(A: ArrayLike | EigenSystem) -> NDArray[np.float64]:
    """Inverse principal square root of a positive definite matrix."""
    es = A if isinstance(A, EigenSystem) else sym_eigen(A)
    _check_pd(es)
    return sym_function(es, lambda w: 1.0 / np.sqrt(w))


def _same_shape(*mats: NDArray[np.float64]) -> None:
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise DimensionMismatch(f"matrices have different shapes: {sorted(shapes)}")


def bures_wasserstein_sq(A: ArrayLike, B: ArrayLike) -> float:
    r"""Squared Bures-Wasserstein distance between two PSD matrices.

    .. math::
        d_W^2(A, B) = \operatorname{tr} A + \operatorname{tr} B
        - 2 \operatorname{tr}\bigl((A^{1/2} B A^{1/2})^{1/2}\bigr)

    This is the squared 2-Wasserstein distance between N(0, A) and N(0, B).
    The result is clamped at zero to absorb roundoff.
    """
    A = as_symmetric(A)
    B = as_symmetric(B)
    _same_shape(A, B)
    _check_psd(sym_eigen(B), "second argument")
    ra = sqrt_psd(A)
    cross = sym_eigen(ra @ B @ ra)
    cross_trace = float(np.sum(np.sqrt(np.clip(cross.values, 0.0, None))))
    value = float(np.trace(A) + np.trace(B) - 2.0 * cross_trace)
    return max(value, 0.0)


def bures_transport(A: ArrayLike, B: ArrayLike) -> NDArray[np.float64]:
    """Optimal transport map from N(0, A) to N(0, B).

    Returns the unique positive definite ``J`` with ``J A J = B``, computed as
    ``A^{-1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2}``. ``A`` must be positive
    definite.
    """
    A = as_symmetric(A)
    B = as_symmetric(B)
    _same_shape(A, B)
    es = sym_eigen(A)
    _check_pd(es, "first argument")
    ra = sym_function(es, np.sqrt)
    ria = sym_function(es, lambda w: 1.0 / np.sqrt(w))
    middle = sqrt_psd(ra @ B @ ra)
    J = ria @ middle @ ria
    return 0.5 * (J + J.T)


def frechet_sqrt(B: ArrayLike, H: ArrayLike) -> NDArray[np.float64]:
    """Directional derivative of ``B -> B^{1/2}`` at ``B`` in direction ``H``.

    The derivative ``X`` solves the Sylvester equation
    ``B^{1/2} X + X B^{1/2} = H``.
    """
    B = as_symmetric(B)
    H = as_symmetric(H)
    _same_shape(B, H)
    es = sym_eigen(B)
    _check_pd(es)
    root = sym_function(es, np.sqrt)
    X = scipy.linalg.solve_sylvester(root, root, H)
    return 0.5 * (X + X.T)


def frechet_bures(A: ArrayLike, B: ArrayLike, G: ArrayLike, H: ArrayLike) -> float:
    """Directional derivative of ``bures_wasserstein_sq`` at ``(A, B)`` along ``(G, H)``.

    Equals ``tr((I - J) G) + tr((I - J^{-1}) H)`` with ``J = bures_transport(A, B)``.
    Both ``A`` and ``B`` must be positive definite.
    """
    A = as_symmetric(A)
    B = as_symmetric(B)
    G = as_symmetric(G)
    H = as_symmetric(H)
    _same_shape(A, B, G, H)
    _check_pd(sym_eigen(B), "second argument")
    J = bures_transport(A, B)
    J_inv = np.linalg.inv(J)
    eye = np.eye(A.shape[0])
    return float(np.sum((eye - J) * G) + np.sum((eye - J_inv) * H))
