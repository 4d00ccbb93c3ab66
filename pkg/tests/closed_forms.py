"""Closed-form coefficient values for small parametric correlation families.

Used as independent oracles: none of these go through an eigensolver.
"""

import numpy as np

sqrt = np.sqrt


def bivariate(rho):
    R = np.array([[1.0, rho], [rho, 1.0]])
    d = (2 - sqrt(1 + rho) - sqrt(1 - rho)) / (2 - sqrt(2))
    return R, {"d1": d, "d2": d, "rv": rho**2, "rvadj": rho**2}


def equicorrelated(rho):
    """Trivariate equicorrelation, split 1 + 2."""
    R = np.full((3, 3), rho) + (1 - rho) * np.eye(3)
    a = abs(rho)
    d1 = (1 + sqrt(1 + rho) - sqrt(1 + 2 * rho) - sqrt(1 - rho)) / (1 + sqrt(1 + a) - sqrt(2 + a))
    root = rho * sqrt(rho**2 + 12 * rho + 12)
    lp = 0.5 * (rho**2 + 2 * rho + 2 + root)
    lm = 0.5 * (rho**2 + 2 * rho + 2 - root)
    d2 = (2 + rho - sqrt(lp) - sqrt(lm)) / (2 + a - sqrt(rho**2 + 2 * a + 2))
    rv = 2 * rho**2 / sqrt(2 * (1 + rho**2))
    rvadj = 2 * rho**2 / (1 + a)
    return R, {"d1": d1, "d2": d2, "rv": rv, "rvadj": rvadj}


def ar3(rho):
    """Trivariate AR(1) correlation, split 1 + 2."""
    R = np.array([[1, rho, rho**2], [rho, 1, rho], [rho**2, rho, 1.0]])
    a = abs(rho)
    l1p = rho**2 / 2 + rho * sqrt(rho**2 + 8) / 2 + 1
    l1m = rho**2 / 2 - rho * sqrt(rho**2 + 8) / 2 + 1
    l2p = 1.5 * rho**2 + sqrt(5) * rho * sqrt(rho**2 + 4) / 2 + 1
    l2m = 1.5 * rho**2 - sqrt(5) * rho * sqrt(rho**2 + 4) / 2 + 1
    d1 = (1 + sqrt(1 + rho) + sqrt(1 - rho) - sqrt(1 - rho**2) - sqrt(l1p) - sqrt(l1m)) / (
        1 + sqrt(1 + a) - sqrt(2 + a)
    )
    d2 = (3 - sqrt(1 - rho**2) - sqrt(l2p) - sqrt(l2m)) / (2 + a - sqrt(2 + 2 * a + rho**2))
    rv = (rho**4 + rho**2) / sqrt(2 * (1 + rho**2))
    rvadj = (rho**4 + rho**2) / (1 + a)
    return R, {"d1": d1, "d2": d2, "rv": rv, "rvadj": rvadj}


def ma3(rho):
    """Trivariate MA(1) correlation, split 1 + 2; positive definite for |rho| < 1/sqrt(2)."""
    R = np.array([[1, rho, 0], [rho, 1, rho], [0, rho, 1.0]])
    a = abs(rho)
    d1 = (sqrt(1 + rho) + sqrt(1 - rho) - sqrt(1 + rho * sqrt(2)) - sqrt(1 - rho * sqrt(2))) / (
        1 + sqrt(1 + a) - sqrt(2 + a)
    )
    rv = rho**2 / sqrt(2 * (1 + rho**2))
    rvadj = rho**2 / (1 + a)
    return R, {"d1": d1, "rv": rv, "rvadj": rvadj}


FAMILIES = {
    "bivariate": (bivariate, 1, np.linspace(-0.99, 0.99, 199)),
    "equicorrelated": (equicorrelated, 1, np.linspace(-0.49, 0.99, 199)),
    "ar3": (ar3, 1, np.linspace(-0.99, 0.99, 199)),
    "ma3": (ma3, 1, np.linspace(-0.707, 0.707, 199)),
}
