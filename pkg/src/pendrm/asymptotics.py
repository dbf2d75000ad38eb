"""Population limit matrices and the baseline-CDF process covariance.

Everything here is a population-level integral against a specified
baseline distribution for group 2, with group 1 tilted by
exp(alpha + beta' h(x)).  The lognormal family integrates on the log
scale over mean +/- 12 standard deviations, which carries all the mass to
well below the quadrature tolerance; custom baselines integrate on their
stated support.  Integrands must decay before a truncated endpoint, or an
infinite endpoint, to machine-negligible size; otherwise the requested
moment is judged nonexistent and IntegrationError is raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.integrate
import scipy.linalg
from scipy.special import ndtr

from .data import HTransform
from .errors import (
    DimensionError,
    IntegrationError,
    InvalidArgument,
    SingularityError,
)
from .likelihood import PenaltySpec, Theta, penalty_terms

_QUAD_TOL = 1e-9
_DECAY_TOL = 1e-9
_TAIL_SIGMAS = 12.0


@dataclass(frozen=True)
class DistSpec:
    """Baseline distribution of group 2: lognormal(mu2, sigma) or custom.

    A custom baseline supplies a scalar density and a support interval;
    the density must integrate to 1 within 1e-8 (checked here).
    """

    family: str = "lognormal"
    mu2: float = 0.0
    sigma: float = 1.0
    density: Callable[[float], float] | None = None
    support: tuple[float, float] | None = None

    def __post_init__(self):
        if self.family == "lognormal":
            if not (np.isfinite(self.sigma) and self.sigma > 0.0):
                raise InvalidArgument(f"sigma must be > 0, got {self.sigma!r}")
            if not np.isfinite(self.mu2):
                raise InvalidArgument(f"mu2 must be finite, got {self.mu2!r}")
        elif self.family == "custom":
            if self.density is None or self.support is None:
                raise InvalidArgument("custom baseline needs density and support")
            lo, hi = float(self.support[0]), float(self.support[1])
            if not lo < hi:
                raise InvalidArgument(f"support must satisfy lo < hi, got {self.support!r}")
            object.__setattr__(self, "support", (lo, hi))
            total, err = scipy.integrate.quad(
                self.density, lo, hi, epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=200
            )
            if abs(total - 1.0) > 1e-8:
                raise InvalidArgument(
                    f"custom density integrates to {total!r}, not 1 (within 1e-8)"
                )
        else:
            raise InvalidArgument(
                f"unknown family {self.family!r}; expected 'lognormal' or 'custom'"
            )


@dataclass(frozen=True)
class PopulationMatrices:
    """Limit matrices A, V, and the scaled information S = rho1/(1+rho1) A."""

    A: np.ndarray
    V: np.ndarray
    S: np.ndarray

    @property
    def sigma(self) -> np.ndarray:
        """Asymptotic covariance S^-1 V S^-1 of the unpenalized estimate."""
        try:
            s_inv = scipy.linalg.inv(self.S)
        except scipy.linalg.LinAlgError as exc:
            raise SingularityError("S is singular") from exc
        out = s_inv @ self.V @ s_inv
        return 0.5 * (out + out.T)


def lognormal_true_theta(mu1: float, mu2: float, sigma: float) -> Theta:
    """Exact (alpha, beta) when both groups are lognormal with common sigma.

    The density ratio of lognormal(mu1, sigma) to lognormal(mu2, sigma) is
    exp(alpha + beta log x) with beta = (mu1 - mu2)/sigma^2 and
    alpha = (mu2^2 - mu1^2)/(2 sigma^2).
    """
    if not (np.isfinite(sigma) and sigma > 0.0):
        raise InvalidArgument(f"sigma must be > 0, got {sigma!r}")
    alpha = (mu2 * mu2 - mu1 * mu1) / (2.0 * sigma * sigma)
    beta = (mu1 - mu2) / (sigma * sigma)
    return Theta(alpha=alpha, beta=np.array([beta]))


def _h_point(h: HTransform, x: float) -> np.ndarray:
    return h._apply(np.array([[x]], dtype=float), "integrand")[0]


def _log_weight(hx: np.ndarray, theta: Theta, log_rho1: float) -> float:
    """log of w(x) = exp(u)/(1 + rho1 exp(u)), stable for any u."""
    u = theta.alpha + float(hx @ theta.beta)
    v = u + log_rho1
    softplus = max(v, 0.0) + math.log1p(math.exp(-abs(v)))
    return u - softplus


def _moment_integrals(dist, theta, rho1, h, upper=None, want_a22=True):
    """Partial moments of (1, h) and optionally h h' under w(x) dG2(x).

    ``upper`` truncates the integrals at a raw-scale point; None means the
    full integral.  Returns (a11, a21, a22) with a22 None when not wanted.
    """
    d = theta.d
    log_rho1 = math.log(rho1)

    if dist.family == "lognormal":
        zlo = dist.mu2 - _TAIL_SIGMAS * dist.sigma
        zhi = dist.mu2 + _TAIL_SIGMAS * dist.sigma
        if upper is not None:
            if upper <= 0.0 or math.log(upper) <= zlo:
                return 0.0, np.zeros(d), (np.zeros((d, d)) if want_a22 else None)
            zhi = min(zhi, math.log(upper))
        inv_norm = 1.0 / (dist.sigma * math.sqrt(2.0 * math.pi))

        def base(z):
            x = math.exp(z)
            hx = _h_point(h, x)
            standard = (z - dist.mu2) / dist.sigma
            dens = inv_norm * math.exp(-0.5 * standard * standard)
            return hx, math.exp(_log_weight(hx, theta, log_rho1)) * dens

        lo, hi = zlo, zhi
        full_domain = upper is None
    else:
        lo, hi = dist.support
        if upper is not None:
            if upper <= lo:
                return 0.0, np.zeros(d), (np.zeros((d, d)) if want_a22 else None)
            hi = min(hi, upper)

        def base(x):
            hx = _h_point(h, x)
            return hx, math.exp(_log_weight(hx, theta, log_rho1)) * dist.density(x)

        full_domain = upper is None

    def component(phi):
        def f(point):
            hx, core = base(point)
            return phi(hx) * core

        if full_domain:
            _check_decay(f, lo, hi, dist.family)
        value, err = scipy.integrate.quad(
            f, lo, hi, epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=200
        )
        if not math.isfinite(value) or err > 1e-6 * max(1.0, abs(value)):
            raise IntegrationError(
                f"quadrature failed (value={value!r}, error estimate={err!r})"
            )
        return value

    a11 = component(lambda hx: 1.0)
    a21 = np.array([component(lambda hx, k=k: hx[k]) for k in range(d)])
    a22 = None
    if want_a22:
        a22 = np.empty((d, d))
        for k in range(d):
            for l in range(k, d):
                a22[k, l] = component(lambda hx, k=k, l=l: hx[k] * hx[l])
                a22[l, k] = a22[k, l]
    return a11, a21, a22


def _check_decay(f, lo, hi, family):
    """Require the integrand to be negligible near truncated or infinite ends."""
    probes = []
    if family == "lognormal":
        probes = [lo, hi]
    else:
        if math.isinf(hi):
            probes += [10.0**k for k in range(3, 13, 3)]
        if math.isinf(lo):
            probes += [-(10.0**k) for k in range(3, 13, 3)]
    for point in probes:
        try:
            value = abs(f(point))
        except OverflowError:
            value = math.inf
        if not value <= _DECAY_TOL:
            raise IntegrationError(
                f"integrand does not decay near {point!r} (value {value!r}); "
                "the requested moment does not exist for this baseline"
            )


def population_matrices(
    dist: DistSpec, theta: Theta, rho1: float, h: HTransform
) -> PopulationMatrices:
    """Full limit matrices A, V, S for the given tilt and baseline."""
    if not (np.isfinite(rho1) and rho1 > 0.0):
        raise InvalidArgument(f"rho1 must be > 0, got {rho1!r}")
    if h.output_dim(1) != theta.d:
        raise DimensionError(
            f"h maps scalars to dimension {h.output_dim(1)} but theta has d={theta.d}"
        )
    a11, a21, a22 = _moment_integrals(dist, theta, rho1, h)
    d = theta.d
    a = np.empty((d + 1, d + 1))
    a[0, 0] = a11
    a[0, 1:] = a21
    a[1:, 0] = a21
    a[1:, 1:] = a22
    shrink = rho1 / (1.0 + rho1)
    first = a[:, 0]
    v = shrink * a - rho1 * np.outer(first, first)
    return PopulationMatrices(A=a, V=0.5 * (v + v.T), S=shrink * a)


def asymptotic_bias(lambda0: float, S, beta0, spec: PenaltySpec) -> np.ndarray:
    """First-order bias lambda0 * S^-1 b(beta0) of the penalized estimate."""
    if not (np.isfinite(lambda0) and lambda0 >= 0.0):
        raise InvalidArgument(f"lambda0 must be >= 0, got {lambda0!r}")
    s = np.asarray(S, dtype=float)
    b = penalty_terms(beta0, spec).gradient
    if s.shape != (b.shape[0], b.shape[0]):
        raise DimensionError(
            f"S must be ({b.shape[0]}, {b.shape[0]}) for this beta0, got {s.shape}"
        )
    try:
        return lambda0 * scipy.linalg.solve(s, b, assume_a="sym")
    except scipy.linalg.LinAlgError as exc:
        raise SingularityError("S is singular") from exc


def _baseline_cdf(dist: DistSpec, x: float) -> float:
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    if dist.family == "lognormal":
        if x <= 0.0:
            return 0.0
        return float(ndtr((math.log(x) - dist.mu2) / dist.sigma))
    lo, hi = dist.support
    if x <= lo:
        return 0.0
    value, _ = scipy.integrate.quad(
        dist.density, lo, min(x, hi), epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=200
    )
    return min(max(value, 0.0), 1.0)


def g2_process_cov(
    s: float,
    t: float,
    dist: DistSpec,
    theta: Theta,
    rho1: float,
    h: HTransform,
) -> float:
    """Limit covariance of the scaled group-2 CDF estimate at points (s, t).

    Writing a(u) for the partial moment vector (A11(u), A21(u)') truncated
    at u and G2 for the baseline CDF, the covariance is

        (1+rho1) (G2(min) - G2(t) G2(s)) - rho1 (1+rho1) A11(min)
        + rho1 (1+rho1) a(t)' A^-1 a(s),

    symmetric in (s, t) and vanishing as either point goes to +/- infinity.
    """
    full = population_matrices(dist, theta, rho1, h)

    def partial_vector(point):
        if math.isinf(point) and point > 0:
            return full.A[:, 0].copy(), 1.0
        a11, a21, _ = _moment_integrals(dist, theta, rho1, h, upper=point, want_a22=False)
        return np.concatenate([[a11], a21]), _baseline_cdf(dist, point)

    a_s, g_s = partial_vector(s)
    a_t, g_t = partial_vector(t)
    # min(s, t) is one of the two evaluation points; reuse its partials.
    if s <= t:
        a11_m, g_m = a_s[0], g_s
    else:
        a11_m, g_m = a_t[0], g_t

    try:
        solved = scipy.linalg.solve(full.A, a_s, assume_a="sym")
    except scipy.linalg.LinAlgError as exc:
        raise SingularityError("A is singular") from exc
    quad_form = float(a_t @ solved)
    one_plus = 1.0 + rho1
    return (
        one_plus * (g_m - g_t * g_s)
        - rho1 * one_plus * a11_m
        + rho1 * one_plus * quad_form
    )
