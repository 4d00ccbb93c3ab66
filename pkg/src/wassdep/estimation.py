"""
Estimating the coefficients from data.

Two estimators of the correlation matrix are provided: the empirical
correlation matrix (Gaussian data) and the normal-scores rank correlation
matrix (Gaussian copula, margins arbitrary). Either can be followed by
orthogonally invariant eigenvalue shrinkage before the coefficients are
evaluated. Confidence intervals use the analytic asymptotic variance of
``derivatives.asymptotic_variance`` evaluated at the estimate.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special, stats

from .coefficients import CoefficientKind, coefficient, cov_to_corr
from .coupling import BlockPartition
from .derivatives import asymptotic_variance
from .errors import (
    DegenerateEigenvalues,
    DimensionMismatch,
    DomainError,
    KindMismatch,
    NotFinite,
    SampleTooSmall,
    TiesWarning,
    ZeroVariance,
)
from .linalg import _check_psd, as_symmetric, sym_eigen

__all__ = [
    "Estimator",
    "Shrinkage",
    "EstimateReport",
    "as_data_matrix",
    "empirical_covariance",
    "empirical_correlation",
    "qnorm",
    "tie_counts",
    "normal_scores_correlation",
    "shrink_ds1",
    "shrink_ds2",
    "shrink",
    "estimate_correlation",
    "estimate_with_ci",
    "estimate_from_correlation",
    "two_sample_difference_ci",
]


class Estimator(str, enum.Enum):
    """Which correlation estimator to use."""

    GAUSSIAN = "gaussian"  # empirical correlation of the raw data
    RANK = "rank"  # normal-scores rank correlation (Gaussian copula)

    @classmethod
    def parse(cls, value: "Estimator | str") -> "Estimator":
        if isinstance(value, cls):
            return value
        aliases = {"gaussiandata": "gaussian", "copula": "rank", "gaussiancopula": "rank", "normal-scores": "rank"}
        key = str(value).lower().replace("_", "")
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown estimator {value!r}; expected 'gaussian' or 'rank'") from None


class Shrinkage(str, enum.Enum):
    NONE = "none"
    DS1 = "ds1"
    DS2 = "ds2"

    @classmethod
    def parse(cls, value: "Shrinkage | str | None") -> "Shrinkage":
        if value is None:
            return cls.NONE
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown shrinkage {value!r}; expected none, ds1 or ds2") from None


@dataclass(frozen=True)
class EstimateReport:
    """Point estimate and studentized confidence interval for one coefficient.

    ``zeta``, ``lower`` and ``upper`` are None when no variance is available:
    for the RV coefficients, and when the estimated blocks have repeated
    eigenvalues. The reason is recorded in ``warnings``.
    """

    kind: CoefficientKind
    estimate: float
    zeta: float | None
    lower: float | None
    upper: float | None
    n: int
    alpha: float
    estimator: Estimator
    shrinkage: Shrinkage
    p: int
    q: int
    warnings: tuple[str, ...] = field(default=())

    @property
    def stderr(self) -> float | None:
        """Standard error ``zeta / sqrt(n)``."""
        return None if self.zeta is None else self.zeta / math.sqrt(self.n)

    @property
    def degenerate(self) -> bool:
        return self.zeta is None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["kind"] = self.kind.value
        out["estimator"] = self.estimator.value
        out["shrinkage"] = self.shrinkage.value
        out["stderr"] = self.stderr
        out["warnings"] = list(self.warnings)
        return out


def as_data_matrix(data: ArrayLike, min_rows: int = 3) -> NDArray[np.float64]:
    """Validate an n x d array of observations (rows are samples)."""
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"data must be two-dimensional, got shape {X.shape}")
    if X.shape[0] < min_rows:
        raise SampleTooSmall(f"need at least {min_rows} observations, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise NotFinite("data contain NaN or Inf values")
    return X


def empirical_covariance(data: ArrayLike) -> NDArray[np.float64]:
    """Sample covariance matrix with divisor ``n - 1``."""
    X = as_data_matrix(data)
    Xc = X - X.mean(axis=0)
    S = Xc.T @ Xc / (X.shape[0] - 1)
    return 0.5 * (S + S.T)


def empirical_correlation(data: ArrayLike) -> NDArray[np.float64]:
    """Empirical (Pearson) correlation matrix.

    Raises
    ------
    ZeroVariance
        If a column is constant.
    """
    return cov_to_corr(empirical_covariance(data))


def qnorm(p: ArrayLike) -> NDArray[np.float64] | float:
    """Standard normal quantile function.

    Evaluated with ``scipy.special.ndtri``, made exactly antisymmetric:
    ``qnorm(1 - p) == -qnorm(p)`` whenever ``1 - p`` is exact.

    Raises
    ------
    DomainError
        If any ``p`` is outside the open interval (0, 1).
    """
    arr = np.asarray(p, dtype=np.float64)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("qnorm is defined on the open interval (0, 1)")
    upper = arr > 0.5
    out = np.where(upper, -special.ndtri(1.0 - arr), special.ndtri(arr))
    out = np.where(arr == 0.5, 0.0, out)
    return float(out) if out.ndim == 0 else out


def tie_counts(data: ArrayLike) -> NDArray[np.int64]:
    """Number of observations per column that share their value with another observation."""
    X = np.asarray(data, dtype=np.float64)
    S = np.sort(X, axis=0)
    same = S[1:] == S[:-1]
    tied = np.zeros(S.shape, dtype=bool)
    tied[1:] |= same
    tied[:-1] |= same
    return tied.sum(axis=0)


def normal_scores_correlation(data: ArrayLike) -> NDArray[np.float64]:
    """Normal-scores rank correlation matrix.

    Each column is replaced by ``qnorm(rank / (n + 1))``. Cross products of
    these scores are divided by ``sum_i qnorm(i / (n + 1))^2``, which is the
    value they take for identical rankings. Ties get midranks and trigger a
    ``TiesWarning``. The diagonal is set to 1.

    The result depends on the data only through the ranks, so it is unchanged
    by strictly increasing transformations of any column.
    """
    X = as_data_matrix(data, min_rows=2)
    n = X.shape[0]
    ties = tie_counts(X)
    if np.any(ties):
        cols = ", ".join(f"{j}: {int(c)}" for j, c in enumerate(ties) if c)
        warnings.warn(f"tied observations (column: count) {cols}; midranks used", TiesWarning, stacklevel=2)
    ranks = stats.rankdata(X, method="average", axis=0)
    Z = qnorm(ranks / (n + 1.0))
    ref = qnorm(np.arange(1, n + 1) / (n + 1.0))
    R = (Z.T @ Z) / np.dot(ref, ref)
    R = np.clip(0.5 * (R + R.T), -1.0, 1.0)
    np.fill_diagonal(R, 1.0)
    return R


def _shrink_check(Sigma_hat: ArrayLike, n: int):
    S = as_symmetric(Sigma_hat)
    d = S.shape[0]
    if n <= d + 1:
        raise SampleTooSmall(f"shrinkage needs n > d + 1, got n={n}, d={d}")
    es = sym_eigen(S)
    l = _check_psd(es, "Sigma_hat")
    m = n - 1
    j = np.arange(1, d + 1)
    return es, l, m, d, m / (m + d + 1.0 - 2.0 * j)


def shrink_ds1(Sigma_hat: ArrayLike, n: int) -> NDArray[np.float64]:
    """Dey-Srinivasan minimax eigenvalue shrinkage.

    The j-th largest eigenvalue is multiplied by ``(n-1) / ((n-1) + d + 1 - 2j)``
    and the eigenvectors are kept. Large eigenvalues shrink, small ones grow.

    Parameters
    ----------
    Sigma_hat : array_like
        Covariance estimate with divisor ``n - 1`` (or a correlation estimate).
    n : int
        Sample size.
    """
    es, l, _, _, mult = _shrink_check(Sigma_hat, n)
    out = (es.vectors * (mult * l)) @ es.vectors.T
    return 0.5 * (out + out.T)


def shrink_ds2(Sigma_hat: ArrayLike, n: int) -> NDArray[np.float64]:
    """DS1 with an additional log-eigenvalue correction.

    On the Wishart scale ``s_j = (n-1) l_j`` the correction subtracts
    ``s_j log(s_j) tau / (b1 + u)`` with ``u = sum_j log(s_j)^2``,
    ``b1 = 5.8 (d-2)^2 / (m+d-1)``, ``tau = 1.2 (d-2) / (m+d-1)^2`` and
    ``m = n - 1``. The correction vanishes for ``d = 2``. Eigenvalues are
    clamped at zero.
    """
    es, l, m, d, mult = _shrink_check(Sigma_hat, n)
    s = m * l
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(s > 0, np.log(s), 0.0)
    u = float(np.sum(logs**2))
    b1 = 5.8 * (d - 2) ** 2 / (m + d - 1.0)
    tau = 1.2 * (d - 2) / (m + d - 1.0) ** 2
    corr = s * logs * tau / (b1 + u) if (b1 + u) > 0 else np.zeros_like(s)
    new = np.clip(mult * l - corr / m, 0.0, None)
    out = (es.vectors * new) @ es.vectors.T
    return 0.5 * (out + out.T)


def shrink(Sigma_hat: ArrayLike, n: int, method: Shrinkage | str | None) -> NDArray[np.float64]:
    """Apply the named shrinkage (or none) and return the shrunk matrix."""
    method = Shrinkage.parse(method)
    if method is Shrinkage.DS1:
        return shrink_ds1(Sigma_hat, n)
    if method is Shrinkage.DS2:
        return shrink_ds2(Sigma_hat, n)
    return as_symmetric(Sigma_hat)


def estimate_correlation(data: ArrayLike, estimator: Estimator | str = Estimator.GAUSSIAN, shrinkage: Shrinkage | str | None = None) -> NDArray[np.float64]:
    """Correlation estimate after optional shrinkage and re-standardisation.

    For Gaussian data the covariance matrix is shrunk; for the rank path the
    normal-scores matrix is shrunk. The result is rescaled to unit diagonal.
    """
    X = as_data_matrix(data)
    estimator = Estimator.parse(estimator)
    shrinkage = Shrinkage.parse(shrinkage)
    n = X.shape[0]
    if estimator is Estimator.GAUSSIAN:
        base = empirical_covariance(X)
        cov_to_corr(base)  # fail early on constant columns
    else:
        if np.any(np.ptp(X, axis=0) == 0):
            j = int(np.flatnonzero(np.ptp(X, axis=0) == 0)[0])
            raise ZeroVariance(f"variable {j} has zero variance")
        base = normal_scores_correlation(X)
    return cov_to_corr(shrink(base, n, shrinkage))


def _z(alpha: float) -> float:
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    return 0.0 if alpha == 1.0 else float(-special.ndtri(alpha / 2.0))


def estimate_from_correlation(
    R: ArrayLike,
    n: int,
    p: int,
    q: int | None = None,
    kind: CoefficientKind | str = CoefficientKind.D1,
    alpha: float = 0.05,
    estimator: Estimator | str = Estimator.GAUSSIAN,
    shrinkage: Shrinkage | str | None = None,
    notes: tuple[str, ...] = (),
) -> EstimateReport:
    """Build an ``EstimateReport`` from an already estimated correlation matrix."""
    kind = CoefficientKind.parse(kind)
    z = _z(alpha)
    part = BlockPartition(R, p, q)
    est = coefficient(kind, part)
    zeta = lower = upper = None
    notes = tuple(notes)
    if kind in (CoefficientKind.D1, CoefficientKind.D2):
        try:
            zeta = math.sqrt(asymptotic_variance(part, kind=kind))
        except DegenerateEigenvalues as exc:
            notes += (f"no confidence interval: {exc}",)
        else:
            half = z * zeta / math.sqrt(n)
            lower, upper = max(est - half, 0.0), min(est + half, 1.0)
    else:
        notes += (f"no asymptotic variance is available for {kind.value}",)
    return EstimateReport(
        kind=kind,
        estimate=est,
        zeta=zeta,
        lower=lower,
        upper=upper,
        n=int(n),
        alpha=float(alpha),
        estimator=Estimator.parse(estimator),
        shrinkage=Shrinkage.parse(shrinkage),
        p=part.p,
        q=part.q,
        warnings=notes,
    )


def estimate_with_ci(
    data: ArrayLike,
    p: int,
    q: int | None = None,
    kind: CoefficientKind | str = CoefficientKind.D1,
    estimator: Estimator | str = Estimator.GAUSSIAN,
    shrinkage: Shrinkage | str | None = None,
    alpha: float = 0.05,
) -> EstimateReport:
    """Estimate a coefficient from data with a ``1 - alpha`` confidence interval.

    The interval is ``estimate +/- z_{1-alpha/2} zeta / sqrt(n)`` intersected
    with [0, 1], where ``zeta^2`` is the asymptotic variance evaluated at the
    (shrunk) correlation estimate. ``alpha = 1`` gives a zero-width interval.

    Parameters
    ----------
    data : array_like, shape (n, p + q)
        Observations in rows. The first ``p`` columns form the first block.
    p, q : int
        Block sizes.
    kind : {'d1', 'd2', 'rv', 'rvadj'}
    estimator : {'gaussian', 'rank'}
        Empirical correlation of the raw data, or normal-scores rank
        correlation for Gaussian-copula data.
    shrinkage : {None, 'none', 'ds1', 'ds2'}
    alpha : float

    Returns
    -------
    EstimateReport
        Confidence bounds are None when the estimated blocks have repeated
        eigenvalues or when ``kind`` is an RV coefficient.
    """
    X = as_data_matrix(data)
    q = X.shape[1] - p if q is None else q
    if p + q != X.shape[1]:
        raise DimensionMismatch(f"p + q = {p + q} but the data have {X.shape[1]} columns")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TiesWarning)
        R = estimate_correlation(X, estimator, shrinkage)
    notes = tuple(str(w.message) for w in caught if issubclass(w.category, TiesWarning))
    for msg in notes:
        warnings.warn(msg, TiesWarning, stacklevel=2)
    return estimate_from_correlation(R, X.shape[0], p, q, kind, alpha, estimator, shrinkage, notes)


def two_sample_difference_ci(reportA: EstimateReport, reportB: EstimateReport, alpha: float = 0.05) -> tuple[float, float]:
    """Interval for ``D(A) - D(B)`` from two independent samples.

    ``diff +/- z_{1-alpha/2} sqrt(zeta_A^2 / n_A + zeta_B^2 / n_B)``, not
    clipped.

    Raises
    ------
    KindMismatch
        If the reports are for different coefficients.
    DegenerateEigenvalues
        If either report has no variance.
    """
    if reportA.kind != reportB.kind:
        raise KindMismatch(f"cannot compare {reportA.kind.value} with {reportB.kind.value}")
    if reportA.zeta is None or reportB.zeta is None:
        raise DegenerateEigenvalues("both reports need an asymptotic variance")
    z = _z(alpha)
    diff = reportA.estimate - reportB.estimate
    half = z * math.sqrt(reportA.zeta**2 / reportA.n + reportB.zeta**2 / reportB.n)
    return diff - half, diff + half
