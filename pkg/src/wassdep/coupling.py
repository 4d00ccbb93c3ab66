"""
Block partitions of a covariance matrix and Gaussian couplings of two blocks.

A coupling of ``Sigma1`` (p x p) and ``Sigma2`` (q x q) is any PSD matrix of
size p + q with those diagonal blocks. Among them, ``sigma_m`` returns the one
whose spectrum majorizes all the others.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import entr

from .errors import DimensionMismatch, IterationFailure
from .linalg import EigenSystem, _check_psd, as_symmetric, psd_tolerance, sqrt_psd, sym_eigen

__all__ = [
    "BlockPartition",
    "as_partition",
    "padded_block_spectra",
    "sigma_m",
    "majorizes",
    "von_neumann_entropy",
    "random_coupling",
]

MAJORIZATION_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class BlockPartition:
    """A symmetric PSD matrix split into a leading p-block and a trailing q-block.

    Parameters
    ----------
    sigma : array_like, shape (p + q, p + q)
        Covariance or correlation matrix. It is validated and symmetrised.
    p : int
        Size of the first block.
    q : int, optional
        Size of the second block. Defaults to ``d - p``.
    """

    sigma: NDArray[np.float64]
    p: int
    q: int

    def __init__(self, sigma: ArrayLike, p: int, q: int | None = None):
        S = as_symmetric(sigma)
        d = S.shape[0]
        p = int(p)
        q = d - p if q is None else int(q)
        if p < 1 or q < 1 or p + q != d:
            raise DimensionMismatch(f"cannot split a {d}x{d} matrix into blocks of sizes p={p}, q={q}")
        object.__setattr__(self, "sigma", S)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        _check_psd(self.eigen, "sigma")
        S.setflags(write=False)

    @property
    def d(self) -> int:
        return self.p + self.q

    @property
    def sigma1(self) -> NDArray[np.float64]:
        return self.sigma[: self.p, : self.p]

    @property
    def sigma2(self) -> NDArray[np.float64]:
        return self.sigma[self.p :, self.p :]

    @property
    def psi(self) -> NDArray[np.float64]:
        """Off-diagonal block, shape (p, q)."""
        return self.sigma[: self.p, self.p :]

    @property
    def sigma0(self) -> NDArray[np.float64]:
        """Block-diagonal matrix with the same diagonal blocks (the independence coupling)."""
        S0 = np.zeros_like(self.sigma)
        S0[: self.p, : self.p] = self.sigma1
        S0[self.p :, self.p :] = self.sigma2
        return S0

    @property
    def pi1(self) -> NDArray[np.float64]:
        """Projection onto the first p coordinates, shape (p, d)."""
        return np.eye(self.p, self.d)

    @property
    def pi2(self) -> NDArray[np.float64]:
        """Projection onto the last q coordinates, shape (q, d)."""
        return np.eye(self.q, self.d, k=self.p)

    @property
    def pi(self) -> NDArray[np.float64]:
        """Leading p x q block of the identity."""
        return np.eye(self.p, self.q)

    @cached_property
    def eigen(self) -> EigenSystem:
        return sym_eigen(self.sigma)

    @cached_property
    def eigen1(self) -> EigenSystem:
        return sym_eigen(self.sigma1)

    @cached_property
    def eigen2(self) -> EigenSystem:
        return sym_eigen(self.sigma2)


def as_partition(part: BlockPartition | ArrayLike, p: int | None = None, q: int | None = None) -> BlockPartition:
    """Accept either a ready partition or a matrix plus block sizes."""
    if isinstance(part, BlockPartition):
        if (p is not None and p != part.p) or (q is not None and q != part.q):
            raise DimensionMismatch("block sizes conflict with the given partition")
        return part
    if p is None:
        raise DimensionMismatch("block size p is required when passing a bare matrix")
    return BlockPartition(part, p, q)


def padded_block_spectra(lam1: ArrayLike, lam2: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Clamp two descending spectra at zero and pad the shorter one with zeros."""
    lam1 = np.clip(np.asarray(lam1, dtype=np.float64), 0.0, None)
    lam2 = np.clip(np.asarray(lam2, dtype=np.float64), 0.0, None)
    k = max(lam1.size, lam2.size)
    return np.pad(lam1, (0, k - lam1.size)), np.pad(lam2, (0, k - lam2.size))


def sigma_m(Sigma1: ArrayLike, Sigma2: ArrayLike) -> NDArray[np.float64]:
    """Maximally dependent coupling of two covariance blocks.

    The off-diagonal block is ``U1 Lambda1^{1/2} Pi Lambda2^{1/2} U2^T``, which
    pairs the j-th eigenvector of one block with the j-th eigenvector of the
    other. The result has eigenvalues ``lambda_{j,1} + lambda_{j,2}`` (shorter
    spectrum zero-padded) followed by zeros.

    Parameters
    ----------
    Sigma1 : array_like, shape (p, p)
    Sigma2 : array_like, shape (q, q)

    Returns
    -------
    ndarray, shape (p + q, p + q)

    Raises
    ------
    NotPositiveSemidefinite
        If either block has an eigenvalue below ``-psd_tolerance``.
    """
    S1 = as_symmetric(Sigma1)
    S2 = as_symmetric(Sigma2)
    e1, e2 = sym_eigen(S1), sym_eigen(S2)
    l1 = _check_psd(e1, "Sigma1")
    l2 = _check_psd(e2, "Sigma2")
    p, q = l1.size, l2.size
    k = min(p, q)
    # The same expression covers p > q because Pi is rectangular.
    psi = (e1.vectors[:, :k] * np.sqrt(l1[:k] * l2[:k])) @ e2.vectors[:, :k].T
    S = np.block([[S1, psi], [psi.T, S2]])

    a, b = padded_block_spectra(l1, l2)
    expected = np.pad(a + b, (0, p + q - a.size))
    got = sym_eigen(S).values
    if np.max(np.abs(got - expected)) > 1e-9 * (1.0 + expected[0]):
        raise IterationFailure("maximal coupling failed its eigenvalue self-check")
    return S


def majorizes(x: ArrayLike, y: ArrayLike, slack: float = MAJORIZATION_SLACK) -> bool:
    """Return True if ``y`` majorizes ``x``.

    Every partial sum of the descending-sorted ``y`` must dominate the
    corresponding partial sum of ``x``, and the totals must agree, both up to
    ``slack``.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DimensionMismatch(f"vectors differ in length: {x.size} vs {y.size}")
    cx = np.cumsum(np.sort(x)[::-1])
    cy = np.cumsum(np.sort(y)[::-1])
    if x.size == 0:
        return True
    return bool(np.all(cy >= cx - slack) and abs(cy[-1] - cx[-1]) <= slack)


def von_neumann_entropy(Sigma: ArrayLike) -> float:
    """Von Neumann entropy ``-sum_j lambda_j log lambda_j`` of a PSD matrix (0 log 0 = 0)."""
    lam = _check_psd(sym_eigen(Sigma))
    return float(np.sum(entr(lam)))


def random_coupling(Sigma1: ArrayLike, Sigma2: ArrayLike, seed: int | np.random.Generator) -> NDArray[np.float64]:
    """Draw a random PSD matrix with the given diagonal blocks.

    The off-diagonal block is ``Sigma1^{1/2} C Sigma2^{1/2}`` with ``C`` a
    Gaussian p x q matrix rescaled to spectral norm ``u ~ U(0, 1)``. Any
    contraction ``C`` yields a PSD result, so every coupling with invertible
    blocks can be reached this way.
    """
    S1 = as_symmetric(Sigma1)
    S2 = as_symmetric(Sigma2)
    r1, r2 = sqrt_psd(S1), sqrt_psd(S2)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.Generator(np.random.Philox(seed))
    C = rng.standard_normal((S1.shape[0], S2.shape[0]))
    u = rng.uniform()
    top = np.linalg.norm(C, 2)
    if top > 0:
        C *= u / top
    psi = r1 @ C @ r2
    return np.block([[S1, psi], [psi.T, S2]])
