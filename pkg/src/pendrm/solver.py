"""Damped Newton maximization of the penalized objective, plus diagnostics.

The solver starts at theta = 0, solves the Newton system by Cholesky
factorization of the negated Hessian, and halves the step until the
penalized objective does not decrease, so the trace of accepted values is
non-decreasing by construction.  With lam = 0 and separated data the
objective is unbounded; the solver detects the runaway slope norm and
raises :class:`~pendrm.errors.NonexistenceError` carrying the capped fit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import backend
from .data import DesignData
from .errors import (
    InvalidArgument,
    InvalidBoundsError,
    NonexistenceError,
    SingularHessianError,
)
from .likelihood import (
    PenaltySpec,
    Theta,
    penalized_value_score_hessian,
    penalty_terms,
    value_score_hessian,
)

_LINE_SEARCH_HALVINGS = 30
_GROWTH_WINDOW = 5


@dataclass(frozen=True)
class FitOptions:
    """Solver controls: score tolerance, iteration cap, divergence norm."""

    tol: float = 1e-8
    max_iter: int = 100
    divergence_norm: float = 1e4

    def __post_init__(self):
        if not self.tol > 0.0:
            raise InvalidArgument(f"tol must be > 0, got {self.tol!r}")
        if self.max_iter < 1:
            raise InvalidArgument(f"max_iter must be >= 1, got {self.max_iter!r}")
        if not self.divergence_norm > 0.0:
            raise InvalidArgument(
                f"divergence_norm must be > 0, got {self.divergence_norm!r}"
            )


@dataclass(frozen=True)
class FitResult:
    """Fit outcome: estimate, convergence diagnostics, objective values.

    ``lp_trace`` holds the penalized objective at theta = 0 and after each
    accepted Newton step; it is non-decreasing.  ``separation_flag`` is
    True only on capped results produced by the nonexistence path.
    """

    theta: Theta
    converged: bool
    iterations: int
    loglik: float
    penalized_loglik: float
    score_norm: float
    separation_flag: bool
    lp_trace: tuple[float, ...]


@dataclass(frozen=True)
class SeparationDiagnosis:
    """Outcome of the linear-separation check: none, quasi_complete, complete."""

    kind: str


def fit(design: DesignData, spec: PenaltySpec, opts: FitOptions = FitOptions()) -> FitResult:
    """Maximize the penalized objective by damped Newton from theta = 0.

    With lam = 0 the maximizer exists exactly when the design is not
    linearly separated, so the unpenalized path checks separation first;
    a separated design still iterates (to produce the capped estimate the
    simulation protocol keeps) but always ends in NonexistenceError.
    """
    d = design.d
    separated = spec.lam == 0.0 and detect_separation(design).kind != "none"
    v = np.zeros(d + 1)
    lp, grad, hess = penalized_value_score_hessian(design, Theta.from_array(v), spec)
    trace = [lp]
    slope_norms: list[float] = []
    iterations = 0

    kern = backend.active()
    t, n1, lr = design.t, design.n1, design.log_rho1

    def lp_at(vec):
        raw = kern.loglik(t, vec[1:], vec[0], lr, n1)
        return raw - spec.lam * penalty_terms(vec[1:], spec).value

    def nonexistence(why):
        return NonexistenceError(
            f"unpenalized maximizer does not exist ({why}; the slope path "
            "escapes to infinity on separated data). Refit with lam > 0.",
            result=_capped_result(design, v, iterations, lp, trace),
        )

    for _ in range(opts.max_iter):
        if np.max(np.abs(grad)) <= opts.tol and not separated:
            break
        try:
            factor = scipy.linalg.cho_factor(-hess, lower=True)
        except scipy.linalg.LinAlgError as exc:
            if separated:
                raise nonexistence("curvature underflowed at the cap") from exc
            raise SingularHessianError(
                "singular Newton system; the design is degenerate at the "
                "current point. A positive penalty weight (lam > 0) usually "
                "restores a unique maximizer."
            ) from exc
        direction = scipy.linalg.cho_solve(factor, grad)

        step = 1.0
        accepted = None
        slack = 1e-12 * (1.0 + abs(lp))
        for _ in range(_LINE_SEARCH_HALVINGS + 1):
            candidate = v + step * direction
            if lp_at(candidate) >= lp - slack:
                accepted = candidate
                break
            step *= 0.5
        if accepted is None:
            break
        v = accepted
        iterations += 1
        lp, grad, hess = penalized_value_score_hessian(
            design, Theta.from_array(v), spec
        )
        trace.append(lp)

        slope_norm = float(np.linalg.norm(v[1:]))
        slope_norms.append(slope_norm)
        if spec.lam == 0.0 and slope_norm > opts.divergence_norm:
            raise nonexistence(
                f"slope norm {slope_norm:.3g} exceeded {opts.divergence_norm:.3g}"
            )

    if separated:
        raise nonexistence("the design is linearly separated")
    converged = bool(np.max(np.abs(grad)) <= opts.tol)
    if converged:
        try:
            scipy.linalg.cho_factor(-hess, lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise SingularHessianError(
                "score converged but the Hessian is not negative definite; "
                "the maximizer is not unique. A positive penalty weight "
                "(lam > 0) usually fixes this."
            ) from exc
    elif spec.lam == 0.0 and _growing(slope_norms):
        raise nonexistence("iteration cap reached with monotone slope growth")

    theta = Theta.from_array(v)
    raw = kern.loglik(design.t, theta.beta, theta.alpha, design.log_rho1, design.n1)
    return FitResult(
        theta=theta,
        converged=converged,
        iterations=iterations,
        loglik=raw,
        penalized_loglik=lp,
        score_norm=float(np.max(np.abs(grad))),
        separation_flag=False,
        lp_trace=tuple(trace),
    )


def _capped_result(design, v, iterations, lp, trace) -> FitResult:
    # Nonexistence only arises at lam = 0, where raw and penalized agree.
    theta = Theta.from_array(v)
    raw, grad, _ = value_score_hessian(design, theta)
    return FitResult(
        theta=theta,
        converged=False,
        iterations=iterations,
        loglik=raw,
        penalized_loglik=lp,
        score_norm=float(np.max(np.abs(grad))),
        separation_flag=detect_separation(design).kind != "none",
        lp_trace=tuple(trace),
    )


def _growing(norms: list[float]) -> bool:
    if len(norms) < 2:
        return False
    tail = norms[-(_GROWTH_WINDOW + 1):]
    return all(b > a for a, b in zip(tail, tail[1:]))


def detect_separation(design: DesignData) -> SeparationDiagnosis:
    """Classify the design as none / quasi_complete / complete separation.

    d = 1 uses the interval rule on the two slope ranges; d > 1 solves two
    small LPs over normalized coordinates: a maximum-margin problem with
    box-bounded coefficients (positive optimum means complete separation)
    and a maximum total-margin problem with nonnegative margins (positive
    optimum means quasi-complete separation).  A design whose pooled points
    all lie on one hyperplane is quasi-complete.
    """
    t = design.t
    n1 = design.n1
    if design.d == 1:
        t1 = t[:n1, 0]
        t2 = t[n1:, 0]
        lo1, hi1 = t1.min(), t1.max()
        lo2, hi2 = t2.min(), t2.max()
        if hi1 < lo2 or hi2 < lo1:
            return SeparationDiagnosis("complete")
        if hi1 == lo2 or hi2 == lo1:
            return SeparationDiagnosis("quasi_complete")
        return SeparationDiagnosis("none")
    return _detect_separation_lp(t, n1)


def _detect_separation_lp(t, n1) -> SeparationDiagnosis:
    from scipy.optimize import linprog

    n, d = t.shape
    center = t.mean(axis=0)
    scale = np.abs(t - center).max(axis=0)
    scale[scale == 0.0] = 1.0
    z = (t - center) / scale
    y = np.where(np.arange(n) < n1, 1.0, -1.0)
    # Margin of row i under coefficients (a, b): y_i * (a + b'z_i).
    signed = np.hstack([y[:, None], y[:, None] * z])

    # Complete: maximize delta s.t. margins >= delta, |coef| <= 1.
    c = np.zeros(d + 2)
    c[-1] = -1.0
    a_ub = np.hstack([-signed, np.ones((n, 1))])
    bounds = [(-1.0, 1.0)] * (d + 1) + [(0.0, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(n), bounds=bounds, method="highs")
    if res.status == 0 and -res.fun > 1e-9:
        return SeparationDiagnosis("complete")

    # Quasi: maximize the total margin s.t. every margin >= 0.
    c2 = -signed.sum(axis=0)
    res2 = linprog(
        c2,
        A_ub=-signed,
        b_ub=np.zeros(n),
        bounds=[(-1.0, 1.0)] * (d + 1),
        method="highs",
    )
    if res2.status == 0 and -res2.fun > 1e-9:
        return SeparationDiagnosis("quasi_complete")

    # All pooled points on one hyperplane: weakly separated with every
    # margin zero, which the LPs above cannot distinguish from overlap.
    augmented = np.hstack([np.ones((n, 1)), z])
    if np.linalg.matrix_rank(augmented) <= d:
        return SeparationDiagnosis("quasi_complete")
    return SeparationDiagnosis("none")


def grid_oracle(design: DesignData, spec: PenaltySpec, bounds, resolution: int) -> Theta:
    """Exhaustive-search maximizer of the penalized objective on a box grid.

    Intended as an independent check for small instances (d + 1 <= 3);
    ``bounds`` is (d+1, 2) rows of (lo, hi) and ``resolution`` is the
    number of grid points per axis, endpoints included.
    """
    d = design.d
    if d + 1 > 3:
        raise InvalidArgument("grid oracle is limited to d + 1 <= 3 parameters")
    bounds = np.asarray(bounds, dtype=float)
    if bounds.shape != (d + 1, 2):
        raise InvalidBoundsError(
            f"bounds must have shape ({d + 1}, 2), got {bounds.shape}"
        )
    if np.any(bounds[:, 0] >= bounds[:, 1]):
        raise InvalidBoundsError("each bounds row needs lo < hi")
    if resolution < 2:
        raise InvalidBoundsError(f"resolution must be >= 2, got {resolution}")

    axes = [np.linspace(lo, hi, resolution) for lo, hi in bounds]
    kern = backend.active()
    t, n1, lr = design.t, design.n1, design.log_rho1
    best_value = -np.inf
    best_point = None
    for point in itertools.product(*axes):
        vec = np.asarray(point)
        value = kern.loglik(t, vec[1:], vec[0], lr, n1)
        value -= spec.lam * penalty_terms(vec[1:], spec).value
        if value > best_value:
            best_value = value
            best_point = vec
    return Theta.from_array(best_point)
