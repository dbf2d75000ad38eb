"""The pooled empirical objective and the separable power penalty.

For a pooled design with rho1 = n1/n2 the objective is

    l(theta) = sum_{sample 1} (alpha + beta' t)
               - sum_{all} log(1 + rho1 * exp(alpha + beta' t)),

maximized in theta = (alpha, beta).  The penalized objective subtracts
lam * J(beta) with J(beta) = sum_j |beta_j|^q, q > 1; alpha is never
penalized.  For 1 < q < 2 the non-smooth |beta_j| is replaced by
sqrt(beta_j^2 + eps^2) in the penalty value and both derivative formulas,
so the solver sees a twice-differentiable objective; q >= 2 is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .data import DesignData
from .errors import DimensionError, InvalidArgument, UnsupportedPenaltyError


@dataclass(frozen=True)
class Theta:
    """Parameter point: scalar intercept and d-vector of slopes."""

    alpha: float
    beta: np.ndarray

    def __post_init__(self):
        alpha = float(self.alpha)
        beta = np.ascontiguousarray(self.beta, dtype=float).reshape(-1)
        if not np.isfinite(alpha) or not np.all(np.isfinite(beta)):
            raise InvalidArgument("theta must be finite")
        beta.flags.writeable = False
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def d(self) -> int:
        return self.beta.shape[0]

    def to_array(self) -> np.ndarray:
        return np.concatenate([[self.alpha], self.beta])

    @classmethod
    def from_array(cls, v) -> "Theta":
        v = np.asarray(v, dtype=float).reshape(-1)
        return cls(alpha=float(v[0]), beta=v[1:])

    @classmethod
    def zeros(cls, d: int) -> "Theta":
        return cls(alpha=0.0, beta=np.zeros(d))


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty configuration: exponent q > 1, weight lam >= 0, smoothing eps.

    eps only enters for 1 < q < 2 and must be positive there; with q >= 2
    the exact formulas are used and eps is ignored.
    """

    q: float
    lam: float
    eps: float = 1e-8

    def __post_init__(self):
        if not np.isfinite(self.q) or self.q <= 1.0:
            raise UnsupportedPenaltyError(
                f"penalty exponent must satisfy q > 1, got q={self.q!r}"
            )
        if not np.isfinite(self.lam) or self.lam < 0.0:
            raise InvalidArgument(f"penalty weight must be >= 0, got {self.lam!r}")
        if self.eps < 0.0 or not np.isfinite(self.eps):
            raise InvalidArgument(f"smoothing eps must be >= 0, got {self.eps!r}")
        if self.q < 2.0 and self.eps == 0.0:
            raise InvalidArgument("eps = 0 is only permitted when q >= 2")


@dataclass(frozen=True)
class PenaltyTerms:
    """Penalty value with gradient and diagonal Hessian in theta layout.

    The leading (intercept) component of ``gradient`` and ``hessian_diag``
    is always 0.
    """

    value: float
    gradient: np.ndarray
    hessian_diag: np.ndarray


def penalty_terms(beta, spec: PenaltySpec) -> PenaltyTerms:
    """J(beta), its gradient, and its diagonal Hessian, padded for alpha."""
    beta = np.asarray(beta, dtype=float).reshape(-1)
    q = spec.q
    if q >= 2.0:
        s = np.abs(beta)
    else:
        s = np.sqrt(beta * beta + spec.eps * spec.eps)
    value = float(np.sum(s**q))
    grad = np.zeros(beta.shape[0] + 1)
    hdiag = np.zeros(beta.shape[0] + 1)
    grad[1:] = np.sign(beta) * q * s ** (q - 1.0)
    with np.errstate(divide="ignore"):
        hdiag[1:] = q * (q - 1.0) * s ** (q - 2.0)
    # q = 2 at beta_j = 0 hits 0**0; the exact second derivative is 2 there.
    if q >= 2.0:
        hdiag[1:] = np.where(s > 0.0, hdiag[1:], 0.0 if q > 2.0 else q * (q - 1.0))
    return PenaltyTerms(value=value, gradient=grad, hessian_diag=hdiag)


def _check_theta(design: DesignData, theta: Theta) -> None:
    if theta.d != design.d:
        raise DimensionError(
            f"theta has {theta.d} slope(s) but the design has d={design.d}"
        )


def empirical_loglik(design: DesignData, theta: Theta) -> float:
    """Unpenalized objective at ``theta``."""
    _check_theta(design, theta)
    kern = backend.active()
    return kern.loglik(design.t, theta.beta, theta.alpha, design.log_rho1, design.n1)


def score(design: DesignData, theta: Theta) -> np.ndarray:
    """Gradient of the unpenalized objective, alpha component first."""
    _check_theta(design, theta)
    kern = backend.active()
    _, grad, _ = kern.loglik_score_hessian(
        design.t, theta.beta, theta.alpha, design.log_rho1, design.n1
    )
    return grad


def hessian(design: DesignData, theta: Theta) -> np.ndarray:
    """Hessian of the unpenalized objective (symmetric, negative semidefinite)."""
    _check_theta(design, theta)
    kern = backend.active()
    _, _, hess = kern.loglik_score_hessian(
        design.t, theta.beta, theta.alpha, design.log_rho1, design.n1
    )
    return hess


def value_score_hessian(design: DesignData, theta: Theta):
    """Fused (value, score, hessian) of the unpenalized objective."""
    _check_theta(design, theta)
    kern = backend.active()
    return kern.loglik_score_hessian(
        design.t, theta.beta, theta.alpha, design.log_rho1, design.n1
    )


def penalized_loglik(design: DesignData, theta: Theta, spec: PenaltySpec) -> float:
    return empirical_loglik(design, theta) - spec.lam * penalty_terms(theta.beta, spec).value


def penalized_score(design: DesignData, theta: Theta, spec: PenaltySpec) -> np.ndarray:
    return score(design, theta) - spec.lam * penalty_terms(theta.beta, spec).gradient


def penalized_hessian(design: DesignData, theta: Theta, spec: PenaltySpec) -> np.ndarray:
    hess = hessian(design, theta).copy()
    hdiag = penalty_terms(theta.beta, spec).hessian_diag
    hess[np.diag_indices_from(hess)] -= spec.lam * hdiag
    return hess


def penalized_value_score_hessian(design: DesignData, theta: Theta, spec: PenaltySpec):
    """Fused penalized (value, score, hessian); the solver's per-step call."""
    value, grad, hess = value_score_hessian(design, theta)
    terms = penalty_terms(theta.beta, spec)
    value = value - spec.lam * terms.value
    grad = grad - spec.lam * terms.gradient
    hess = hess.copy()
    hess[np.diag_indices_from(hess)] -= spec.lam * terms.hessian_diag
    return value, grad, hess
