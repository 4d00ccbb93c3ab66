"""
Dependence coefficients between the two blocks of a covariance matrix.

``d1`` and ``d2`` compare the Bures-Wasserstein geometry of the matrix with
that of the independence coupling ``Sigma0`` and the maximal coupling
``Sigma_m``. Both are 0 at ``Sigma0`` and 1 at ``Sigma_m``. ``rv`` is the
classical RV coefficient and ``rv_adjusted`` rescales it by its maximum over
couplings with the same diagonal blocks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .coupling import BlockPartition, as_partition, padded_block_spectra
from .errors import DegenerateDenominator, ZeroVariance
from .linalg import as_symmetric, sqrt_psd, sym_eigen

__all__ = [
    "CoefficientKind",
    "CoefficientResult",
    "d1",
    "d2",
    "rv",
    "rv_adjusted",
    "coefficient",
    "cov_to_corr",
    "all_coefficients",
    "kappa_values",
]

DENOMINATOR_TOL = 1e-12


class CoefficientKind(str, enum.Enum):
    D1 = "d1"
    D2 = "d2"
    RV = "rv"
    RVADJ = "rvadj"

    @classmethod
    def parse(cls, value: "CoefficientKind | str") -> "CoefficientKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower().replace("_", ""))
        except ValueError:
            raise ValueError(f"unknown coefficient kind {value!r}; expected one of d1, d2, rv, rvadj") from None


@dataclass(frozen=True, eq=False)
class CoefficientResult:
    """All four coefficients together with the spectra they were computed from."""

    d1: float
    d2: float
    rv: float
    rv_adj: float
    eigen_sigma: NDArray[np.float64]
    eigen_blocks: tuple[NDArray[np.float64], NDArray[np.float64]]
    kappa: NDArray[np.float64]

    def __getitem__(self, kind: CoefficientKind | str) -> float:
        kind = CoefficientKind.parse(kind)
        return {"d1": self.d1, "d2": self.d2, "rv": self.rv, "rvadj": self.rv_adj}[kind.value]

    def as_dict(self) -> dict:
        return {
            "d1": self.d1,
            "d2": self.d2,
            "rv": self.rv,
            "rv_adj": self.rv_adj,
            "eigen_sigma": self.eigen_sigma.tolist(),
            "eigen_blocks": [b.tolist() for b in self.eigen_blocks],
            "kappa": self.kappa.tolist(),
        }


def _ratio(num: float, den: float, scale: float, what: str) -> float:
    if not den > DENOMINATOR_TOL * max(scale, 1e-300):
        raise DegenerateDenominator(f"{what} denominator vanishes ({den:.3g}); is one block zero?")
    return float(np.clip(num / den, 0.0, 1.0))


def _spectrum_floor(values: NDArray[np.float64]) -> NDArray[np.float64]:
    """Clamp eigenvalues at zero, zeroing those within solver roundoff of it.

    Square roots amplify roundoff: an exact zero computed as 1e-16 would add
    1e-8 to a trace of square roots.
    """
    v = np.clip(values, 0.0, None)
    if v.size:
        v[v <= 64 * np.finfo(float).eps * v.size * v.max()] = 0.0
    return v


def _block_spectra(part: BlockPartition) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    return _spectrum_floor(part.eigen1.values), _spectrum_floor(part.eigen2.values)


def d1_terms(part: BlockPartition) -> tuple[float, float]:
    """Numerator and denominator of ``d1``."""
    l1, l2 = _block_spectra(part)
    lam = _spectrum_floor(part.eigen.values)
    a, b = padded_block_spectra(l1, l2)
    y = np.sum(np.sqrt(l1)) + np.sum(np.sqrt(l2))
    return y - np.sum(np.sqrt(lam)), y - np.sum(np.sqrt(a + b))


def kappa_values(part: BlockPartition) -> NDArray[np.float64]:
    """Eigenvalues of ``Sigma0^{1/2} Sigma Sigma0^{1/2}``, descending and clamped at 0."""
    r0 = np.zeros_like(part.sigma)
    r0[: part.p, : part.p] = sqrt_psd(part.eigen1)
    r0[part.p :, part.p :] = sqrt_psd(part.eigen2)
    P = r0 @ part.sigma @ r0
    return _spectrum_floor(sym_eigen(0.5 * (P + P.T)).values)


def d2_terms(part: BlockPartition, kappa: NDArray[np.float64] | None = None) -> tuple[float, float]:
    """Numerator and denominator of ``d2``."""
    l1, l2 = _block_spectra(part)
    a, b = padded_block_spectra(l1, l2)
    if kappa is None:
        kappa = kappa_values(part)
    total = np.sum(l1) + np.sum(l2)
    return total - np.sum(np.sqrt(kappa)), total - np.sum(np.hypot(a, b))


def d1(part: BlockPartition | ArrayLike, p: int | None = None, q: int | None = None) -> float:
    """First quasi-Gaussian Wasserstein dependence coefficient.

    .. math::
        D_1 = \\frac{\\operatorname{tr}\\Sigma_1^{1/2} + \\operatorname{tr}\\Sigma_2^{1/2}
        - \\operatorname{tr}\\Sigma^{1/2}}
        {\\operatorname{tr}\\Sigma_1^{1/2} + \\operatorname{tr}\\Sigma_2^{1/2}
        - \\operatorname{tr}\\Sigma_m^{1/2}}

    Parameters
    ----------
    part : BlockPartition or array_like
        Partitioned matrix, or a bare matrix together with ``p`` (and ``q``).

    Returns
    -------
    float
        Value in [0, 1].

    Raises
    ------
    DegenerateDenominator
        If a block is zero.
    """
    part = as_partition(part, p, q)
    num, den = d1_terms(part)
    scale = np.sum(np.sqrt(np.clip(part.eigen1.values, 0, None))) + np.sum(np.sqrt(np.clip(part.eigen2.values, 0, None)))
    return _ratio(num, den, scale, "d1")


def d2(part: BlockPartition | ArrayLike, p: int | None = None, q: int | None = None) -> float:
    """Second quasi-Gaussian Wasserstein dependence coefficient.

    The numerator ``tr(Sigma) - tr((Sigma0^{1/2} Sigma Sigma0^{1/2})^{1/2})``
    is half the squared Bures-Wasserstein distance between ``Sigma`` and
    ``Sigma0``. The denominator is the same quantity at ``Sigma_m``.
    """
    part = as_partition(part, p, q)
    num, den = d2_terms(part)
    return _ratio(num, den, float(np.trace(part.sigma)), "d2")


def _rv_parts(part: BlockPartition) -> tuple[float, float, float]:
    cross = float(np.sum(part.psi**2))
    l1, l2 = _block_spectra(part)
    k = min(l1.size, l2.size)
    scale = float(np.sqrt(np.sum(l1**2) * np.sum(l2**2)))
    return cross, scale, float(np.dot(l1[:k], l2[:k]))


def rv(part: BlockPartition | ArrayLike, p: int | None = None, q: int | None = None) -> float:
    """RV coefficient ``tr(Psi Psi^T) / sqrt(tr(Sigma1^2) tr(Sigma2^2))``."""
    part = as_partition(part, p, q)
    cross, scale, _ = _rv_parts(part)
    return _ratio(cross, scale, scale, "rv")


def rv_adjusted(part: BlockPartition | ArrayLike, p: int | None = None, q: int | None = None) -> float:
    """RV coefficient divided by its largest value over couplings with the same blocks.

    The maximum is ``sum_{j <= min(p, q)} lambda_{j,1} lambda_{j,2}``, attained
    at ``Sigma_m``.
    """
    part = as_partition(part, p, q)
    cross, scale, top = _rv_parts(part)
    return _ratio(cross, top, scale, "rv_adjusted")


def coefficient(kind: CoefficientKind | str, part: BlockPartition | ArrayLike, p: int | None = None, q: int | None = None) -> float:
    """Dispatch to ``d1``, ``d2``, ``rv`` or ``rv_adjusted`` by kind."""
    kind = CoefficientKind.parse(kind)
    fn = {CoefficientKind.D1: d1, CoefficientKind.D2: d2, CoefficientKind.RV: rv, CoefficientKind.RVADJ: rv_adjusted}[kind]
    return fn(part, p, q)


def all_coefficients(part: BlockPartition | ArrayLike, p: int | None = None, q: int | None = None) -> CoefficientResult:
    """Compute all four coefficients, sharing the eigendecompositions."""
    part = as_partition(part, p, q)
    kappa = kappa_values(part)
    l1, l2 = _block_spectra(part)
    return CoefficientResult(
        d1=d1(part),
        d2=_ratio(*d2_terms(part, kappa), float(np.trace(part.sigma)), "d2"),
        rv=rv(part),
        rv_adj=rv_adjusted(part),
        eigen_sigma=part.eigen.values.copy(),
        eigen_blocks=(l1, l2),
        kappa=kappa,
    )


def cov_to_corr(Sigma: ArrayLike) -> NDArray[np.float64]:
    """Rescale a covariance matrix to a correlation matrix.

    Returns ``D^{-1/2} Sigma D^{-1/2}`` with ``D`` the diagonal of ``Sigma``.
    The diagonal of the result is set to exactly 1.

    Raises
    ------
    ZeroVariance
        If a diagonal entry is not positive.
    """
    S = as_symmetric(Sigma)
    v = np.diag(S).copy()
    bad = np.flatnonzero(~(v > 1e-14 * max(float(np.max(np.abs(v))), 1e-300)))
    if bad.size:
        raise ZeroVariance(f"variable {int(bad[0])} has zero variance")
    s = 1.0 / np.sqrt(v)
    R = S * s[:, None] * s[None, :]
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    return R
