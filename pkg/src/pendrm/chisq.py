"""Chi-square CDF and quantile built on the regularized incomplete gamma."""

from scipy.special import gammainc

from .errors import InvalidArgument

_QUANTILE_TOL = 1e-10


def chi_square_cdf(x: float, df: int) -> float:
    """P(chi2_df <= x) = P(df/2, x/2), the regularized lower incomplete gamma."""
    if df < 1:
        raise InvalidArgument(f"df must be >= 1, got {df}")
    if not x >= 0.0:
        raise InvalidArgument(f"x must be >= 0, got {x!r}")
    return float(gammainc(df / 2.0, x / 2.0))


def chi_square_quantile(p: float, df: int) -> float:
    """Smallest x with cdf(x, df) >= p, by bisection to 1e-10.

    Monotonicity of the CDF makes bisection exact up to the bracket width;
    p = 0 returns 0.
    """
    if df < 1:
        raise InvalidArgument(f"df must be >= 1, got {df}")
    if not 0.0 <= p < 1.0:
        raise InvalidArgument(f"p must lie in [0, 1), got {p!r}")
    if p == 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while chi_square_cdf(hi, df) < p:
        hi *= 2.0
        if hi > 1e300:
            raise InvalidArgument(f"quantile bracket failed for p={p!r}")
    while hi - lo > _QUANTILE_TOL:
        mid = 0.5 * (lo + hi)
        if chi_square_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
