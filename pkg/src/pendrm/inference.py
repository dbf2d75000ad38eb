"""Post-fit quantities: jump weights, CDF estimates, covariance, Wald test.

All formulas are evaluated at a supplied parameter point, normally a
converged fit.  Writing v = alpha + beta't + log(rho1), the jump weight of
a pooled observation is p = exp(-softplus(v))/n2 and the tilted weight for
the sample-1 distribution is exp(u - softplus(v))/n2, both finite for any
|v| the solver can produce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .chisq import chi_square_cdf
from .data import DesignData
from .errors import DimensionError, InvalidArgument, SingularityError
from .likelihood import PenaltySpec, Theta, penalty_terms

__all__ = [
    "JumpWeights",
    "CdfEstimate",
    "CovarianceEstimate",
    "WaldTest",
    "jump_weights",
    "cdf_estimates",
    "estimate_A_V",
    "sandwich_sigma",
    "wald_test",
    "ridge_path_approximation",
    "efficiency",
]


@dataclass(frozen=True)
class JumpWeights:
    """Per-observation mass of the estimated baseline distribution."""

    p: np.ndarray


@dataclass(frozen=True)
class CdfEstimate:
    """Step-function distribution estimate on sorted distinct support points.

    ``mass[k]`` is the weight accumulated on (support[k-1], support[k]],
    with the first bin covering everything up to support[0]; ``which`` is
    the group (1 or 2) whose distribution is estimated.
    """

    support: np.ndarray
    mass: np.ndarray
    which: int

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.mass)


@dataclass(frozen=True)
class CovarianceEstimate:
    """Plug-in limit matrices and the sandwich covariance at the fit."""

    A_hat: np.ndarray
    V_hat: np.ndarray
    Sigma_hat: np.ndarray


@dataclass(frozen=True)
class WaldTest:
    """Scaled quadratic form in the slope estimate with its p-value."""

    W: float
    df: int
    p_value: float


def _stable_parts(design: DesignData, theta: Theta):
    if theta.d != design.d:
        raise DimensionError(
            f"theta has {theta.d} slope(s) but the design has d={design.d}"
        )
    u = theta.alpha + design.t @ theta.beta
    v = u + design.log_rho1
    e = np.exp(-np.abs(v))
    softplus = np.maximum(v, 0.0) + np.log1p(e)
    sig = np.where(v >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
    return u, softplus, sig


def jump_weights(design: DesignData, theta: Theta) -> JumpWeights:
    """Baseline jump weights 1/(n2 (1 + rho1 exp(alpha + beta't))).

    At any point where the intercept score vanishes (every converged fit,
    any lam), the weights sum to 1 and the tilted weights exp(u) p sum
    to 1 as well.
    """
    _, softplus, _ = _stable_parts(design, theta)
    return JumpWeights(p=np.exp(-softplus) / design.n2)


def cdf_estimates(
    design: DesignData,
    theta: Theta,
    eval_points=None,
    column: int = 0,
) -> tuple[CdfEstimate, CdfEstimate]:
    """Estimated CDFs of both groups evaluated on the raw scale.

    The evaluation axis is raw covariate ``column`` (default the first);
    ``eval_points`` must be nondecreasing and defaults to the distinct
    observed values.  Returns (group-1 estimate, group-2 estimate).
    """
    if not 0 <= column < design.m:
        raise InvalidArgument(
            f"column {column} out of range for {design.m} raw covariate(s)"
        )
    x = design.x[:, column]
    if eval_points is None:
        points = np.unique(x)
    else:
        points = np.asarray(eval_points, dtype=float).reshape(-1)
        if points.size == 0:
            raise InvalidArgument("eval_points must be nonempty")
        if np.any(np.diff(points) < 0):
            raise InvalidArgument("eval_points must be nondecreasing")
        points = np.unique(points)

    u, softplus, _ = _stable_parts(design, theta)
    p2 = np.exp(-softplus) / design.n2
    p1 = np.exp(u - softplus) / design.n2

    # Index of the first evaluation point >= x; rows beyond the last point
    # contribute to no bin.
    idx = np.searchsorted(points, x, side="left")
    inside = idx < points.size
    mass1 = np.bincount(idx[inside], weights=p1[inside], minlength=points.size)
    mass2 = np.bincount(idx[inside], weights=p2[inside], minlength=points.size)
    return (
        CdfEstimate(support=points, mass=mass1, which=1),
        CdfEstimate(support=points, mass=mass2, which=2),
    )


def estimate_A_V(design: DesignData, theta: Theta) -> tuple[np.ndarray, np.ndarray]:
    """Plug-in moment matrix A_hat and centered V_hat at ``theta``.

    A_hat weights each pooled observation by p * w with
    w = exp(u)/(1 + rho1 exp(u)); the identity
    (rho1/(1+rho1)) A_hat = -hessian/n holds at every theta, not only at
    fits, because p * w = sig (1 - sig)/(n2 rho1) pointwise.
    """
    u, softplus, _ = _stable_parts(design, theta)
    rho1 = design.rho1
    pw = np.exp(u - 2.0 * softplus) / design.n2
    z = np.hstack([np.ones((design.n, 1)), design.t])
    a_hat = (z.T * pw) @ z
    a_hat = 0.5 * (a_hat + a_hat.T)
    shrink = rho1 / (1.0 + rho1)
    first = a_hat[:, 0]
    v_hat = shrink * a_hat - rho1 * np.outer(first, first)
    v_hat = 0.5 * (v_hat + v_hat.T)
    return a_hat, v_hat


def sandwich_sigma(
    design: DesignData, theta: Theta, spec: PenaltySpec
) -> CovarianceEstimate:
    """Sandwich covariance M^-1 V_hat M^-1 with the penalty curvature in M.

    M = (rho1/(1+rho1)) A_hat + (lam/n) diag(penalty Hessian at theta);
    a singular M raises SingularityError (more data or a larger lam are
    the usual fixes).
    """
    a_hat, v_hat = estimate_A_V(design, theta)
    shrink = design.rho1 / (1.0 + design.rho1)
    m = shrink * a_hat
    hdiag = penalty_terms(theta.beta, spec).hessian_diag
    m[np.diag_indices_from(m)] += (spec.lam / design.n) * hdiag
    try:
        m_inv = scipy.linalg.inv(m)
    except scipy.linalg.LinAlgError as exc:
        raise SingularityError(
            "the sandwich middle matrix is singular at this fit; "
            "more data or a larger penalty weight is needed"
        ) from exc
    if not np.all(np.isfinite(m_inv)):
        raise SingularityError(
            "the sandwich middle matrix is numerically singular at this fit"
        )
    sigma = m_inv @ v_hat @ m_inv
    sigma = 0.5 * (sigma + sigma.T)
    return CovarianceEstimate(A_hat=a_hat, V_hat=v_hat, Sigma_hat=sigma)


def wald_test(beta_hat, Sigma_hat, n: int) -> WaldTest:
    """W = n beta' (slope block of Sigma)^-1 beta against chi-square(d).

    ``Sigma_hat`` is the full (d+1) x (d+1) covariance; its lower-right
    d x d block must be positive definite.
    """
    beta_hat = np.asarray(beta_hat, dtype=float).reshape(-1)
    sigma = np.asarray(Sigma_hat, dtype=float)
    d = beta_hat.shape[0]
    if sigma.shape != (d + 1, d + 1):
        raise DimensionError(
            f"Sigma_hat must be ({d + 1}, {d + 1}) for {d} slope(s), "
            f"got {sigma.shape}"
        )
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    block = sigma[1:, 1:]
    try:
        factor = scipy.linalg.cho_factor(block, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularityError(
            "slope block of Sigma_hat is not positive definite"
        ) from exc
    w = float(n * beta_hat @ scipy.linalg.cho_solve(factor, beta_hat))
    if not math.isfinite(w):
        raise SingularityError("Wald statistic is not finite at this fit")
    w = max(w, 0.0)
    return WaldTest(W=w, df=d, p_value=1.0 - chi_square_cdf(w, d))


def ridge_path_approximation(
    design: DesignData, theta_unrestricted: Theta, lam: float
) -> Theta:
    """One-step quadratic approximation to the q = 2 path at weight ``lam``.

    Expanding the objective around the unpenalized fit gives
    theta(lam) ~= (C + 2 lam D)^-1 C theta_hat with C the negated Hessian
    at the fit and D = diag(0, 1, ..., 1); exact at lam = 0 and shrinking
    the slopes to 0 as lam grows.
    """
    if lam < 0.0 or not np.isfinite(lam):
        raise InvalidArgument(f"lam must be >= 0, got {lam!r}")
    from .likelihood import hessian

    c = -hessian(design, theta_unrestricted)
    lhs = c.copy()
    idx = np.arange(1, design.d + 1)
    lhs[idx, idx] += 2.0 * lam
    rhs = c @ theta_unrestricted.to_array()
    try:
        solution = scipy.linalg.solve(lhs, rhs, assume_a="sym")
    except scipy.linalg.LinAlgError as exc:
        raise SingularityError("ridge-path system is singular") from exc
    return Theta.from_array(solution)


def efficiency(mse_penalized: float, mse_unpenalized: float) -> float:
    """Ratio of penalized to unpenalized mean squared error."""
    if not (mse_penalized > 0.0 and math.isfinite(mse_penalized)):
        raise InvalidArgument(f"mse_penalized must be > 0, got {mse_penalized!r}")
    if not (mse_unpenalized > 0.0 and math.isfinite(mse_unpenalized)):
        raise InvalidArgument(f"mse_unpenalized must be > 0, got {mse_unpenalized!r}")
    return mse_penalized / mse_unpenalized
