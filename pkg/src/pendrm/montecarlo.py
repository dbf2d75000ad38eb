"""Seeded samplers and the simulation-study runners.

Replications are driven by counter-based streams: stream (seed, index)
is an independent Philox generator, so any replication can be reproduced
in isolation and results do not depend on execution order.  Replication
``rep`` of a study draws its two samples from streams 2*rep and 2*rep + 1,
and aggregation runs in replication order, so reruns of the same cell are
bit-identical.

Replication-level numerical failures are counted in ``n_nonconverged``
and never raised: a replication whose unpenalized maximizer does not
exist keeps the capped estimate from the solver, and a replication whose
covariance cannot be formed counts as a rejection exactly when the fit
was capped (a diverged slope is overwhelming evidence against equality).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .chisq import chi_square_cdf, chi_square_quantile
from .data import DesignData, HTransform, TwoSampleData, apply_h
from .errors import (
    InvalidArgument,
    NonexistenceError,
    SingularHessianError,
    SingularityError,
)
from .inference import sandwich_sigma, wald_test
from .likelihood import PenaltySpec, Theta
from .asymptotics import lognormal_true_theta
from .solver import FitOptions, FitResult, fit

__all__ = [
    "RngStream",
    "SimCell",
    "SimRow",
    "CurvePoint",
    "sample_lognormal",
    "run_table_cell",
    "mse_efficiency_curve",
    "null_wald_sample",
    "sim_rows_csv",
    "chi_square_cdf",
    "chi_square_quantile",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream: independent generator per (seed, index) pair."""

    seed: int
    index: int

    def __post_init__(self):
        if not 0 <= int(self.seed) <= _MASK64:
            raise InvalidArgument("seed must be a 64-bit nonnegative integer")
        if not 0 <= int(self.index) <= _MASK64:
            raise InvalidArgument("index must be a 64-bit nonnegative integer")

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.index], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def sample_lognormal(n: int, mu: float, sigma: float, stream: RngStream) -> np.ndarray:
    """Draw n lognormal observations exp(mu + sigma Z) as an (n, 1) matrix."""
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    if not (np.isfinite(sigma) and sigma > 0.0):
        raise InvalidArgument(f"sigma must be > 0, got {sigma!r}")
    z = stream.generator().standard_normal(n)
    return np.exp(mu + sigma * z).reshape(-1, 1)


@dataclass(frozen=True)
class SimCell:
    """One simulation configuration of the bundled lognormal study.

    lam is the study's regularization label and follows the usual ridge
    convention: the fitted objective subtracts (lam / 2) J(beta), so the
    PenaltySpec built from a cell carries weight lam / 2.  The halving
    applies only to study cells; PenaltySpec taken directly is literal.
    """

    mu1: float
    mu2: float
    sigma: float
    n1: int
    n2: int
    lam: float
    q: float = 2.0
    reps: int = 1000
    seed: int = 0
    alpha_level: float = 0.05

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise InvalidArgument("n1 and n2 must be >= 1")
        if self.reps < 1:
            raise InvalidArgument(f"reps must be >= 1, got {self.reps}")
        if not 0.0 < self.alpha_level < 1.0:
            raise InvalidArgument(
                f"alpha_level must lie in (0, 1), got {self.alpha_level!r}"
            )
        if not (np.isfinite(self.sigma) and self.sigma > 0.0):
            raise InvalidArgument(f"sigma must be > 0, got {self.sigma!r}")
        # Penalty validation happens in PenaltySpec; fail early here.
        PenaltySpec(q=self.q, lam=self.lam)


@dataclass(frozen=True)
class SimRow:
    """Aggregates of one cell: slope mean and MSE, rejection rate, failures."""

    mean_beta_hat: float
    mse_beta_hat: float
    power: float
    n_nonconverged: int
    reps_used: int


class CurvePoint(NamedTuple):
    lam: float
    mse: float
    efficiency: float


_LOG_H = HTransform("log")


def _draw_design(cell: SimCell, rep: int) -> DesignData:
    data = TwoSampleData(
        sample_lognormal(cell.n1, cell.mu1, cell.sigma, RngStream(cell.seed, 2 * rep)),
        sample_lognormal(cell.n2, cell.mu2, cell.sigma, RngStream(cell.seed, 2 * rep + 1)),
    )
    return apply_h(data, _LOG_H)


def _fit_capped(design: DesignData, spec: PenaltySpec, opts: FitOptions):
    """Fit, mapping nonexistence to its capped result. Returns (result, failed)."""
    try:
        result = fit(design, spec, opts)
        return result, not result.converged
    except NonexistenceError as exc:
        return exc.result, True
    except SingularHessianError:
        # Degenerate design (cannot occur with continuous draws, but the
        # simulation loop must never raise); report a null fit.
        zero = Theta.zeros(design.d)
        return (
            FitResult(
                theta=zero,
                converged=False,
                iterations=0,
                loglik=float("nan"),
                penalized_loglik=float("nan"),
                score_norm=float("nan"),
                separation_flag=False,
                lp_trace=(),
            ),
            True,
        )


def _cell_penalty(cell: SimCell, lam: float | None = None) -> PenaltySpec:
    """Study label -> objective weight: a cell labeled lam subtracts (lam/2) J."""
    label = cell.lam if lam is None else lam
    return PenaltySpec(q=cell.q, lam=0.5 * float(label))


def _wald_statistic(design: DesignData, result: FitResult, spec: PenaltySpec):
    """W at a fit, or None when the covariance cannot be formed."""
    try:
        cov = sandwich_sigma(design, result.theta, spec)
        return wald_test(result.theta.beta, cov.Sigma_hat, design.n).W
    except (SingularityError, FloatingPointError):
        return None


def run_table_cell(cell: SimCell, opts: FitOptions = FitOptions()) -> SimRow:
    """Run one study cell: slope mean, MSE, and rejection rate over reps."""
    spec = _cell_penalty(cell)
    beta_true = float(lognormal_true_theta(cell.mu1, cell.mu2, cell.sigma).beta[0])
    critical = chi_square_quantile(1.0 - cell.alpha_level, 1)

    betas = np.empty(cell.reps)
    rejections = 0
    failures = 0
    for rep in range(cell.reps):
        design = _draw_design(cell, rep)
        result, failed = _fit_capped(design, spec, opts)
        betas[rep] = result.theta.beta[0]
        w = _wald_statistic(design, result, spec)
        if w is None:
            failed = True
            if result.separation_flag or not result.converged:
                rejections += 1
        elif w > critical:
            rejections += 1
        if failed:
            failures += 1

    errors = betas - beta_true
    return SimRow(
        mean_beta_hat=float(betas.mean()),
        mse_beta_hat=float((errors * errors).mean()),
        power=rejections / cell.reps,
        n_nonconverged=failures,
        reps_used=cell.reps,
    )


def mse_efficiency_curve(
    cell: SimCell, lambda_grid, opts: FitOptions = FitOptions()
) -> list[CurvePoint]:
    """Common-random-numbers MSE over a lambda grid, relative to lambda = 0.

    Each replication draws its data once and is refit at every grid value,
    so the efficiency ratio MSE(lam)/MSE(0) is free of between-lambda
    sampling noise.  The grid must be nondecreasing and contain 0 (the
    denominator); ``cell.lam`` is ignored in favor of the grid.
    """
    grid = np.asarray(lambda_grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise InvalidArgument("lambda_grid must be nonempty")
    if np.any(np.diff(grid) < 0):
        raise InvalidArgument("lambda_grid must be nondecreasing")
    if not np.any(grid == 0.0):
        raise InvalidArgument("lambda_grid must contain 0 (the efficiency baseline)")
    specs = [_cell_penalty(cell, lam=float(lam)) for lam in grid]
    beta_true = float(lognormal_true_theta(cell.mu1, cell.mu2, cell.sigma).beta[0])

    sq_errors = np.empty((grid.size, cell.reps))
    for rep in range(cell.reps):
        design = _draw_design(cell, rep)
        for j, spec in enumerate(specs):
            result, _ = _fit_capped(design, spec, opts)
            err = result.theta.beta[0] - beta_true
            sq_errors[j, rep] = err * err

    mse = sq_errors.mean(axis=1)
    base = mse[np.nonzero(grid == 0.0)[0][0]]
    return [
        CurvePoint(lam=float(lam), mse=float(m), efficiency=float(m / base))
        for lam, m in zip(grid, mse)
    ]


def null_wald_sample(cell: SimCell, opts: FitOptions = FitOptions()) -> np.ndarray:
    """Wald statistics over replications of an equal-distribution cell.

    Requires mu1 == mu2 (the null); a replication whose covariance cannot
    be formed contributes +inf, preserving length and order.
    """
    if cell.mu1 != cell.mu2:
        raise InvalidArgument(
            f"null sample needs mu1 == mu2, got {cell.mu1!r} and {cell.mu2!r}"
        )
    spec = _cell_penalty(cell)
    out = np.empty(cell.reps)
    for rep in range(cell.reps):
        design = _draw_design(cell, rep)
        result, _ = _fit_capped(design, spec, opts)
        w = _wald_statistic(design, result, spec)
        out[rep] = np.inf if w is None else w
    return out


def sim_rows_csv(entries) -> str:
    """CSV text for (SimCell, SimRow) pairs, one line per cell."""
    buf = io.StringIO()
    buf.write("beta_true,n1,n2,lambda,mean_beta_hat,mse,power,n_nonconverged\n")
    for cell, row in entries:
        beta_true = float(lognormal_true_theta(cell.mu1, cell.mu2, cell.sigma).beta[0])
        fields = [
            repr(beta_true),
            str(cell.n1),
            str(cell.n2),
            repr(float(cell.lam)),
            repr(row.mean_beta_hat),
            repr(row.mse_beta_hat),
            repr(row.power),
            str(row.n_nonconverged),
        ]
        buf.write(",".join(fields) + "\n")
    return buf.getvalue()
