"""Shared test utilities: design builders and independent oracles.

The oracles here deliberately avoid the library's own code paths (plain
Python summation, direction scans, a series/continued-fraction incomplete
gamma) so agreement is evidence, not tautology.
"""

import math

import numpy as np

from pendrm import DesignData, HTransform, Theta, TwoSampleData, apply_h


def make_design(t1, t2, kind: str = "identity") -> DesignData:
    data = TwoSampleData(np.asarray(t1, dtype=float), np.asarray(t2, dtype=float))
    return apply_h(data, HTransform(kind))


def random_design(seed: int, n1: int, n2: int, shift: float = 0.5) -> DesignData:
    rng = np.random.default_rng(seed)
    return make_design(rng.normal(shift, 1.0, n1), rng.normal(0.0, 1.0, n2))


def direct_loglik(t1, t2, alpha: float, beta: float) -> float:
    """Plain-Python evaluation of the pooled log-likelihood, d = 1."""
    n1, n2 = len(t1), len(t2)
    rho1 = n1 / n2
    total = sum(alpha + beta * v for v in t1)
    for v in list(t1) + list(t2):
        total -= math.log(1.0 + rho1 * math.exp(alpha + beta * v))
    return total


def fd_gradient(f, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    g = np.empty_like(x)
    for i in range(x.size):
        hi = x.copy()
        lo = x.copy()
        hi[i] += step
        lo[i] -= step
        g[i] = (f(hi) - f(lo)) / (2.0 * step)
    return g


def fd_jacobian(f, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    cols = []
    for i in range(x.size):
        hi = x.copy()
        lo = x.copy()
        hi[i] += step
        lo[i] -= step
        cols.append((np.asarray(f(hi)) - np.asarray(f(lo))) / (2.0 * step))
    return np.column_stack(cols)


def scan_separation_1d(t1, t2) -> str:
    """Classify a d = 1 design by the interval order of the two groups.

    With an intercept any candidate direction (c0, c1) gives a score
    c0 + c1 t that is monotone in t, so a separating direction exists
    exactly when one group's range sits beyond the other's: disjoint
    open intervals mean complete separation, a shared boundary value
    means quasi-complete.
    """
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if t1.max() < t2.min() or t2.max() < t1.min():
        return "complete"
    if t1.max() <= t2.min() or t2.max() <= t1.min():
        return "quasi_complete"
    return "none"


def reg_lower_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x), series / Lentz CF."""
    if x <= 0.0:
        return 0.0
    log_prefix = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        # Series: P = e^{-x} x^a / Gamma(a) * sum x^k / (a)_{k+1}
        term = 1.0 / a
        total = term
        k = a
        for _ in range(500):
            k += 1.0
            term *= x / k
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        return math.exp(log_prefix) * total
    # Continued fraction for Q, modified Lentz
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    frac = d
    for i in range(1, 500):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        frac *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return 1.0 - math.exp(log_prefix) * frac


def chi2_cdf_oracle(x: float, df: int) -> float:
    return reg_lower_gamma(df / 2.0, x / 2.0)
