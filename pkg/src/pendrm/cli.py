"""Command-line interface.

Five subcommands: ``fit`` and ``test`` operate on a labeled CSV; the
study commands ``simulate``, ``curve``, and ``qq`` draw their own data
from seeded streams.  Reports go to --output (default stdout) as JSON or
CSV; every command is deterministic given its flags, so reruns produce
byte-identical files.  Human-readable summaries go to stderr so stdout
stays machine-readable.

Exit codes: 0 success; 1 usage, parsing, or I/O failure; 2 nonexistent
unpenalized maximizer; 3 singular covariance or Newton system.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .data import HTransform, apply_h, load_two_sample_csv
from .errors import (
    NonexistenceError,
    PendrmError,
    SingularHessianError,
    SingularityError,
)
from .inference import cdf_estimates, jump_weights, sandwich_sigma, wald_test
from .likelihood import PenaltySpec
from .montecarlo import (
    SimCell,
    chi_square_quantile,
    mse_efficiency_curve,
    null_wald_sample,
    run_table_cell,
    sim_rows_csv,
)
from .solver import FitOptions, fit

SCHEMA_VERSION = 1


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parse_lambda_grid(text: str) -> np.ndarray:
    try:
        start_s, stop_s, step_s = text.split(":")
        start, stop, step = float(start_s), float(stop_s), float(step_s)
    except ValueError:
        raise _UsageError(f"--lambda-grid expects a:b:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise _UsageError(f"--lambda-grid needs a <= b and step > 0, got {text!r}")
    count = int(round((stop - start) / step)) + 1
    grid = start + step * np.arange(count)
    return grid[grid <= stop + 1e-12 * max(1.0, abs(stop))]


def _h_type(text: str) -> HTransform:
    try:
        return HTransform.from_string(text)
    except PendrmError as exc:
        raise _UsageError(str(exc)) from None


def _add_data_flags(p: _Parser) -> None:
    p.add_argument("--input", required=True, help="labeled CSV file")
    p.add_argument("--sample-col", default="sample", help="group label column")
    p.add_argument("--h", type=_h_type, default=HTransform("identity"),
                   help="transform: identity | log | quad | cols=0,2")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0,
                   help="penalty weight (default 0)")
    p.add_argument("--q", type=float, default=2.0, help="penalty exponent (default 2)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=100)


def _add_cell_flags(p: _Parser, with_lambda: bool = True) -> None:
    p.add_argument("--mu1", type=float, required=True)
    p.add_argument("--mu2", type=float, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    if with_lambda:
        p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.05, help="test level")


def _add_output_flags(p: _Parser, default_format: str) -> None:
    p.add_argument("--output", default="-", help="output path, - for stdout")
    p.add_argument("--format", choices=("json", "csv"), default=default_format)


def build_parser() -> _Parser:
    parser = _Parser(prog="pendrm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit the penalized model to a CSV")
    _add_data_flags(p_fit)
    _add_output_flags(p_fit, "json")

    p_test = sub.add_parser("test", help="test equality of the two distributions")
    _add_data_flags(p_test)
    p_test.add_argument("--alpha", type=float, default=0.05, help="test level")
    _add_output_flags(p_test, "json")

    p_sim = sub.add_parser("simulate", help="run one lognormal study cell")
    _add_cell_flags(p_sim)
    _add_output_flags(p_sim, "csv")

    p_curve = sub.add_parser("curve", help="MSE and efficiency over a lambda grid")
    _add_cell_flags(p_curve, with_lambda=False)
    p_curve.add_argument("--lambda-grid", type=_parse_lambda_grid, required=True,
                         help="grid as a:b:step, must contain 0")
    _add_output_flags(p_curve, "csv")

    p_qq = sub.add_parser("qq", help="null Wald sample against chi-square quantiles")
    _add_cell_flags(p_qq)
    _add_output_flags(p_qq, "csv")
    return parser


def _write_output(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _load_design(args):
    data = load_two_sample_csv(args.input, sample_column=args.sample_col)
    return apply_h(data, args.h)


def _fit_report(args):
    design = _load_design(args)
    spec = PenaltySpec(q=args.q, lam=args.lam)
    opts = FitOptions(tol=args.tol, max_iter=args.max_iter)
    result = fit(design, spec, opts)
    cov = sandwich_sigma(design, result.theta, spec)
    weights = jump_weights(design, result.theta)
    g1, g2 = cdf_estimates(design, result.theta)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "fit",
        "h": args.h.kind,
        "lambda": args.lam,
        "q": args.q,
        "n1": design.n1,
        "n2": design.n2,
        "rho1": design.rho1,
        "theta": {"alpha": result.theta.alpha, "beta": result.theta.beta.tolist()},
        "converged": result.converged,
        "iterations": result.iterations,
        "loglik": result.loglik,
        "penalized_loglik": result.penalized_loglik,
        "score_norm": result.score_norm,
        "sigma": cov.Sigma_hat.tolist(),
        "jump_weights": weights.p.tolist(),
        "cdf": {
            "points": g2.support.tolist(),
            "g1": g1.cumulative.tolist(),
            "g2": g2.cumulative.tolist(),
        },
    }
    return design, result, cov, report


def cmd_fit(args) -> int:
    design, result, cov, report = _fit_report(args)
    if args.format == "json":
        _write_output(_json_text(report), args.output)
    else:
        g1, g2 = cdf_estimates(design, result.theta)
        cum1 = dict(zip(g1.support.tolist(), g1.cumulative.tolist()))
        cum2 = dict(zip(g2.support.tolist(), g2.cumulative.tolist()))
        weights = report["jump_weights"]
        lines = [
            f"# alpha={report['theta']['alpha']!r}",
            f"# beta={','.join(repr(b) for b in report['theta']['beta'])}",
            f"# converged={str(result.converged).lower()}",
            f"# iterations={result.iterations}",
            "x,sample,p_hat,g1_hat,g2_hat",
        ]
        order = np.argsort(design.x[:, 0], kind="stable")
        group = design.group
        for i in order:
            xi = float(design.x[i, 0])
            lines.append(
                f"{xi!r},{group[i]},{weights[i]!r},{cum1[xi]!r},{cum2[xi]!r}"
            )
        _write_output("\n".join(lines) + "\n", args.output)
    print(
        f"fit: alpha={result.theta.alpha:.6g} "
        f"beta={np.array2string(result.theta.beta, precision=6)} "
        f"converged={result.converged} iterations={result.iterations}",
        file=sys.stderr,
    )
    return 0


def cmd_test(args) -> int:
    design, result, cov, report = _fit_report(args)
    outcome = wald_test(result.theta.beta, cov.Sigma_hat, design.n)
    critical = chi_square_quantile(1.0 - args.alpha, outcome.df)
    reject = outcome.W > critical
    report["command"] = "test"
    report["W"] = outcome.W
    report["df"] = outcome.df
    report["p_value"] = outcome.p_value
    report["alpha"] = args.alpha
    report["critical_value"] = critical
    report["reject"] = reject
    if args.format == "json":
        _write_output(_json_text(report), args.output)
    else:
        lines = [
            "W,df,p_value,critical_value,reject",
            f"{outcome.W!r},{outcome.df},{outcome.p_value!r},"
            f"{critical!r},{str(reject).lower()}",
        ]
        _write_output("\n".join(lines) + "\n", args.output)
    verdict = "reject" if reject else "fail to reject"
    print(
        f"test: W={outcome.W:.6g} df={outcome.df} p={outcome.p_value:.6g}; "
        f"critical value {critical:.4f} at level {args.alpha:g} -> {verdict}",
        file=sys.stderr,
    )
    return 0


def _make_cell(args, lam: float) -> SimCell:
    return SimCell(
        mu1=args.mu1,
        mu2=args.mu2,
        sigma=args.sigma,
        n1=args.n1,
        n2=args.n2,
        lam=lam,
        q=args.q,
        reps=args.reps,
        seed=args.seed,
        alpha_level=args.alpha,
    )


def cmd_simulate(args) -> int:
    cell = _make_cell(args, args.lam)
    row = run_table_cell(cell)
    if args.format == "csv":
        _write_output(sim_rows_csv([(cell, row)]), args.output)
    else:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "simulate",
            "cell": {
                "mu1": cell.mu1, "mu2": cell.mu2, "sigma": cell.sigma,
                "n1": cell.n1, "n2": cell.n2, "lambda": cell.lam, "q": cell.q,
                "reps": cell.reps, "seed": cell.seed, "alpha": cell.alpha_level,
            },
            "mean_beta_hat": row.mean_beta_hat,
            "mse": row.mse_beta_hat,
            "power": row.power,
            "n_nonconverged": row.n_nonconverged,
            "reps_used": row.reps_used,
        }
        _write_output(_json_text(payload), args.output)
    print(
        f"simulate: mean={row.mean_beta_hat:.4f} mse={row.mse_beta_hat:.4f} "
        f"power={row.power:.3f} nonconverged={row.n_nonconverged}",
        file=sys.stderr,
    )
    return 0


def cmd_curve(args) -> int:
    cell = _make_cell(args, 0.0)
    points = mse_efficiency_curve(cell, args.lambda_grid)
    if args.format == "csv":
        lines = ["lambda,mse,efficiency"]
        lines += [f"{p.lam!r},{p.mse!r},{p.efficiency!r}" for p in points]
        _write_output("\n".join(lines) + "\n", args.output)
    else:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "curve",
            "points": [
                {"lambda": p.lam, "mse": p.mse, "efficiency": p.efficiency}
                for p in points
            ],
        }
        _write_output(_json_text(payload), args.output)
    best = min(points, key=lambda p: p.mse)
    print(f"curve: best lambda={best.lam:g} mse={best.mse:.4f}", file=sys.stderr)
    return 0


def cmd_qq(args) -> int:
    cell = _make_cell(args, args.lam)
    sample = np.sort(null_wald_sample(cell))
    quantiles = [
        chi_square_quantile((i - 0.5) / cell.reps, 1) for i in range(1, cell.reps + 1)
    ]
    if args.format == "csv":
        lines = ["w_empirical,chi2_quantile"]
        lines += [f"{w!r},{q!r}" for w, q in zip(sample.tolist(), quantiles)]
        _write_output("\n".join(lines) + "\n", args.output)
    else:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "qq",
            "w_empirical": sample.tolist(),
            "chi2_quantile": quantiles,
        }
        _write_output(_json_text(payload), args.output)
    print(f"qq: {cell.reps} statistics, max W={sample[-1]:.4g}", file=sys.stderr)
    return 0


_COMMANDS = {
    "fit": cmd_fit,
    "test": cmd_test,
    "simulate": cmd_simulate,
    "curve": cmd_curve,
    "qq": cmd_qq,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"pendrm: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except NonexistenceError as exc:
        print(f"pendrm: {exc}", file=sys.stderr)
        return 2
    except (SingularityError, SingularHessianError) as exc:
        print(f"pendrm: {exc}", file=sys.stderr)
        return 3
    except (PendrmError, OSError) as exc:
        print(f"pendrm: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
