"""
Monte Carlo experiments: studentized-error distributions, shrinkage tables and
confidence-interval coverage.

Every replication draws from its own Philox stream keyed by
``(seed, replication index)``, so results do not depend on the number of
worker threads or on the order in which replications finish.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats

from .coefficients import CoefficientKind, all_coefficients
from .errors import DomainError, EmptyExperiment
from .estimation import (
    EstimateReport,
    Estimator,
    Shrinkage,
    estimate_correlation,
    estimate_from_correlation,
    two_sample_difference_ci,
)
from .linalg import _check_psd, as_symmetric, sym_eigen

__all__ = [
    "SimSetting",
    "SETTINGS",
    "get_setting",
    "ar1_correlation",
    "ma1_correlation",
    "PPReport",
    "CoverageReport",
    "COVERAGE_FIELDS",
    "replication_stream",
    "resolve_threads",
    "sample_gaussian",
    "draw_sample",
    "run_pp",
    "run_shrinkage_table",
    "run_coverage",
    "run_two_sample",
]

THREADS_ENV = "WASSDEP_THREADS"
TRUE_VALUE_TOL = 5e-4


def ar1_correlation(rho: float, d: int) -> NDArray[np.float64]:
    """Correlation matrix of a stationary AR(1) process: ``rho^|i-j|``."""
    idx = np.arange(d)
    return float(rho) ** np.abs(idx[:, None] - idx[None, :])


def ma1_correlation(rho: float, d: int) -> NDArray[np.float64]:
    """Tridiagonal correlation matrix with ``rho`` on the first off-diagonals."""
    return np.eye(d) + rho * (np.eye(d, k=1) + np.eye(d, k=-1))


@dataclass(frozen=True, eq=False)
class SimSetting:
    """A population correlation matrix with its block split and true coefficients.

    The stored ``true_d1`` and ``true_d2`` must agree with values recomputed
    from ``R`` to within 5e-4; pass None to fill them in.
    """

    name: str
    R: NDArray[np.float64]
    p: int
    q: int
    true_d1: float | None = None
    true_d2: float | None = None
    exact: dict = field(init=False, repr=False)

    def __post_init__(self):
        R = as_symmetric(self.R)
        if not np.allclose(np.diag(R), 1.0, rtol=0, atol=1e-12):
            raise DomainError(f"setting {self.name}: R must have unit diagonal")
        _check_psd(sym_eigen(R), "R")
        R.setflags(write=False)
        object.__setattr__(self, "R", R)
        res = all_coefficients(R, self.p, self.q)
        exact = {k: res[k] for k in CoefficientKind}
        for kind, stored in ((CoefficientKind.D1, self.true_d1), (CoefficientKind.D2, self.true_d2)):
            if stored is None:
                object.__setattr__(self, f"true_{kind.value}", exact[kind])
            elif abs(stored - exact[kind]) > TRUE_VALUE_TOL:
                raise DomainError(
                    f"setting {self.name}: stored {kind.value} = {stored} but R gives {exact[kind]:.6f}"
                )
        object.__setattr__(self, "exact", exact)

    @property
    def d(self) -> int:
        return self.p + self.q

    def true_value(self, kind: CoefficientKind | str) -> float:
        """Coefficient recomputed from ``R`` at full precision."""
        return self.exact[CoefficientKind.parse(kind)]

    def describe(self) -> dict:
        return {
            "name": self.name,
            "p": self.p,
            "q": self.q,
            "R": self.R.tolist(),
            "true_d1": self.true_d1,
            "true_d2": self.true_d2,
        }


_SETTING3_R = np.array(
    [
        [1.00, 0.20, 0.15, 0.10, 0.25],
        [0.20, 1.00, 0.05, 0.30, 0.35],
        [0.15, 0.05, 1.00, 0.40, 0.50],
        [0.10, 0.30, 0.40, 1.00, 0.45],
        [0.25, 0.35, 0.50, 0.45, 1.00],
    ]
)

SETTINGS: dict[str, SimSetting] = {
    "setting1": SimSetting("Setting1", ar1_correlation(0.25, 3), 1, 2, 0.0260, 0.0249),
    "setting2": SimSetting("Setting2", ar1_correlation(0.8, 3), 1, 2, 0.3430, 0.3320),
    "setting3": SimSetting("Setting3", _SETTING3_R, 2, 3, 0.0507, 0.0503),
}


def get_setting(name: str | int | SimSetting) -> SimSetting:
    """Look up a built-in setting by ``1``, ``"1"``, ``"setting1"`` or ``"Setting1"``."""
    if isinstance(name, SimSetting):
        return name
    key = str(name).lower()
    key = key if key.startswith("setting") else f"setting{key}"
    try:
        return SETTINGS[key]
    except KeyError:
        raise KeyError(f"unknown setting {name!r}; expected one of 1, 2, 3") from None


def replication_stream(seed: int, index: int) -> np.random.Generator:
    """Independent random stream for replication ``index`` of an experiment seeded by ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: the argument, else ``$WASSDEP_THREADS``, else 1."""
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(int(threads), 1)


def _map(fn: Callable[[int], object], reps: int, threads: int | None) -> list:
    if reps < 1:
        raise EmptyExperiment("an experiment needs at least one replication")
    threads = resolve_threads(threads)
    if threads == 1:
        return [fn(i) for i in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(reps)))


def sample_gaussian(R: ArrayLike, n: int, stream: int | np.random.Generator) -> NDArray[np.float64]:
    """Draw ``n`` rows from ``N(0, R)``.

    Uses ``Z = eps Lambda^{1/2} U^T`` from the eigendecomposition of ``R``, so
    singular ``R`` is allowed.
    """
    es = sym_eigen(R)
    lam = _check_psd(es, "R")
    rng = stream if isinstance(stream, np.random.Generator) else np.random.Generator(np.random.Philox(stream))
    eps = rng.standard_normal((int(n), lam.size))
    return (eps * np.sqrt(lam)) @ es.vectors.T


def draw_sample(setting: SimSetting, n: int, estimator: Estimator | str, rng: np.random.Generator) -> NDArray[np.float64]:
    """Gaussian sample for the Gaussian-data path; exponentiated margins for the rank path."""
    X = sample_gaussian(setting.R, n, rng)
    if Estimator.parse(estimator) is Estimator.RANK:
        # Non-Gaussian margins with the same copula.
        X = np.exp(X)
    return X


def _reports(
    setting: SimSetting,
    n: int,
    reps: int,
    seed: int,
    estimator: Estimator,
    combos: Sequence[tuple[CoefficientKind, Shrinkage]],
    alpha: float,
    threads: int | None,
) -> list[list[EstimateReport]]:
    shrinkages = list(dict.fromkeys(s for _, s in combos))

    def one(i: int) -> list[EstimateReport]:
        X = draw_sample(setting, n, estimator, replication_stream(seed, i))
        mats = {s: estimate_correlation(X, estimator, s) for s in shrinkages}
        return [
            estimate_from_correlation(mats[s], n, setting.p, setting.q, k, alpha, estimator, s) for k, s in combos
        ]

    return _map(one, reps, threads)


@dataclass(frozen=True, eq=False)
class PPReport:
    """Studentized errors ``sqrt(n) (D_hat - D) / zeta_hat`` of one experiment.

    ``values`` are sorted and exclude replications without a variance
    estimate; their number is ``dropped``.
    """

    setting: str
    kind: CoefficientKind
    estimator: Estimator
    shrinkage: Shrinkage
    n: int
    reps: int
    dropped: int
    seed: int
    values: NDArray[np.float64]

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def median(self) -> float:
        return float(np.median(self.values))

    @property
    def sd(self) -> float:
        return float(np.std(self.values, ddof=1))

    @property
    def ks(self) -> float:
        """Kolmogorov-Smirnov distance to the standard normal."""
        return float(stats.kstest(self.values, "norm").statistic)

    def summary(self) -> dict:
        return {
            "setting": self.setting,
            "kind": self.kind.value,
            "estimator": self.estimator.value,
            "shrinkage": self.shrinkage.value,
            "n": self.n,
            "reps": self.reps,
            "dropped": self.dropped,
            "mean": self.mean,
            "median": self.median,
            "sd": self.sd,
            "ks": self.ks,
        }


COVERAGE_FIELDS = (
    "setting",
    "kind",
    "estimator",
    "shrinkage",
    "n",
    "reps",
    "alpha",
    "coverage",
    "mean_lower",
    "mean_upper",
    "mc_stderr",
)


@dataclass(frozen=True)
class CoverageReport:
    """Empirical coverage of confidence intervals.

    ``reps`` counts the replications that produced an interval; ``dropped``
    counts those that did not. ``mc_stderr`` is the binomial standard error
    ``sqrt(coverage (1 - coverage) / reps)``.
    """

    setting: str
    kind: CoefficientKind
    estimator: Estimator
    shrinkage: Shrinkage
    n: int | str
    reps: int
    alpha: float
    coverage: float
    mean_lower: float
    mean_upper: float
    mc_stderr: float
    dropped: int = 0
    true_value: float = float("nan")
    seed: int | None = None

    def row(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["estimator"] = self.estimator.value
        d["shrinkage"] = self.shrinkage.value
        return {k: d[k] for k in COVERAGE_FIELDS}

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(kind=self.kind.value, estimator=self.estimator.value, shrinkage=self.shrinkage.value)
        return d


def _coverage(setting_name, kind, estimator, shrinkage, n, alpha, seed, truth, intervals, dropped) -> CoverageReport:
    if not intervals:
        raise EmptyExperiment("no replication produced a confidence interval")
    lo, hi = np.array(intervals, dtype=np.float64).T
    hit = (lo <= truth) & (truth <= hi)
    cov = float(np.mean(hit))
    return CoverageReport(
        setting=setting_name,
        kind=kind,
        estimator=estimator,
        shrinkage=shrinkage,
        n=n,
        reps=len(intervals),
        alpha=float(alpha),
        coverage=cov,
        mean_lower=float(np.mean(lo)),
        mean_upper=float(np.mean(hi)),
        mc_stderr=math.sqrt(cov * (1.0 - cov) / len(intervals)),
        dropped=dropped,
        true_value=float(truth),
        seed=seed,
    )


def run_pp(
    setting: SimSetting | str,
    kind: CoefficientKind | str = CoefficientKind.D1,
    estimator: Estimator | str = Estimator.GAUSSIAN,
    shrinkage: Shrinkage | str | None = None,
    n: int = 200,
    reps: int = 3000,
    seed: int = 0,
    threads: int | None = None,
) -> PPReport:
    """Studentized estimation errors over ``reps`` replications."""
    return run_shrinkage_table(setting, n, reps, seed, estimator, kinds=(kind,), shrinkages=(shrinkage,), threads=threads)[0]


def run_shrinkage_table(
    setting: SimSetting | str,
    n: int = 200,
    reps: int = 3000,
    seed: int = 0,
    estimator: Estimator | str = Estimator.GAUSSIAN,
    kinds: Sequence[CoefficientKind | str] = (CoefficientKind.D1, CoefficientKind.D2),
    shrinkages: Sequence[Shrinkage | str | None] = (Shrinkage.NONE, Shrinkage.DS1, Shrinkage.DS2),
    threads: int | None = None,
) -> list[PPReport]:
    """Studentized errors for every (kind, shrinkage) pair on common samples.

    Returns one ``PPReport`` per pair, kinds varying slowest.
    """
    setting = get_setting(setting)
    estimator = Estimator.parse(estimator)
    combos = [(CoefficientKind.parse(k), Shrinkage.parse(s)) for k in kinds for s in shrinkages]
    for k, _ in combos:
        if k not in (CoefficientKind.D1, CoefficientKind.D2):
            raise DomainError(f"studentized errors need an asymptotic variance; {k.value} has none")
    rows = _reports(setting, n, reps, seed, estimator, combos, 0.05, threads)
    out = []
    for c, (k, s) in enumerate(combos):
        truth = setting.true_value(k)
        vals = [
            math.sqrt(n) * (r[c].estimate - truth) / r[c].zeta
            for r in rows
            if r[c].zeta is not None and r[c].zeta > 0
        ]
        out.append(PPReport(setting.name, k, estimator, s, n, len(vals), reps - len(vals), seed, np.sort(np.array(vals))))
    return out


def run_coverage(
    setting: SimSetting | str,
    kind: CoefficientKind | str = CoefficientKind.D1,
    estimator: Estimator | str = Estimator.RANK,
    shrinkage: Shrinkage | str | None = None,
    n: int = 200,
    reps: int = 3000,
    alpha: float = 0.05,
    seed: int = 0,
    threads: int | None = None,
) -> CoverageReport:
    """Fraction of replications whose interval contains the true coefficient."""
    setting = get_setting(setting)
    kind = CoefficientKind.parse(kind)
    estimator = Estimator.parse(estimator)
    shrinkage = Shrinkage.parse(shrinkage)
    rows = _reports(setting, n, reps, seed, estimator, [(kind, shrinkage)], alpha, threads)
    intervals = [(r[0].lower, r[0].upper) for r in rows if r[0].zeta is not None]
    return _coverage(setting.name, kind, estimator, shrinkage, n, alpha, seed, setting.true_value(kind), intervals, reps - len(intervals))


def run_two_sample(
    settingA: SimSetting | str,
    settingB: SimSetting | str,
    kind: CoefficientKind | str = CoefficientKind.D1,
    nA: int = 200,
    nB: int = 200,
    reps: int = 3000,
    alpha: float = 0.05,
    seed: int = 0,
    estimator: Estimator | str = Estimator.RANK,
    shrinkage: Shrinkage | str | None = None,
    threads: int | None = None,
) -> CoverageReport:
    """Coverage of the two-sample interval for ``D(A) - D(B)`` with independent samples.

    Interval bounds are not clipped, so ``mean_lower`` may be negative.
    """
    A, B = get_setting(settingA), get_setting(settingB)
    kind = CoefficientKind.parse(kind)
    estimator = Estimator.parse(estimator)
    shrinkage = Shrinkage.parse(shrinkage)
    def one(i: int):
        rng = replication_stream(seed, i)
        reports = []
        for s, n in ((A, nA), (B, nB)):
            X = draw_sample(s, n, estimator, rng)
            R = estimate_correlation(X, estimator, shrinkage)
            reports.append(estimate_from_correlation(R, n, s.p, s.q, kind, alpha, estimator, shrinkage))
        if reports[0].zeta is None or reports[1].zeta is None:
            return None
        return two_sample_difference_ci(reports[0], reports[1], alpha)

    results = _map(one, reps, threads)
    intervals = [r for r in results if r is not None]
    truth = A.true_value(kind) - B.true_value(kind)
    return _coverage(f"{A.name}-vs-{B.name}", kind, estimator, shrinkage, f"{nA}/{nB}", alpha, seed, truth, intervals, reps - len(intervals))
