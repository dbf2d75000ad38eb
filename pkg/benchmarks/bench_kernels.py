"""Compare the compiled kernel backend against the NumPy fallback.

Times the fused likelihood kernel, a full Newton fit, and one simulation
cell under each importable backend.  Run from the repository root:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from pendrm import (
    HTransform,
    PenaltySpec,
    RngStream,
    SimCell,
    Theta,
    TwoSampleData,
    apply_h,
    backend,
    fit,
    run_table_cell,
    sample_lognormal,
)
from pendrm.likelihood import value_score_hessian


def _design(n1: int, n2: int, seed: int = 99):
    s1 = sample_lognormal(n1, 1.0, 1.0, RngStream(seed, 0))
    s2 = sample_lognormal(n2, 0.0, 1.0, RngStream(seed, 1))
    return apply_h(TwoSampleData(s1, s2), HTransform("log"))


def _time(fn, min_seconds: float = 0.2):
    # One warm-up call, then as many timed calls as fit into the budget.
    fn()
    calls = 0
    start = time.perf_counter()
    while True:
        fn()
        calls += 1
        elapsed = time.perf_counter() - start
        if elapsed >= min_seconds and calls >= 3:
            return elapsed / calls


def main():
    names = backend.available()
    print(f"backends: {', '.join(names)}")
    if len(names) < 2:
        print("compiled extension not importable; nothing to compare")

    theta = Theta(-0.5, np.array([1.0]))
    spec = PenaltySpec(q=2.0, lam=0.5)
    cell = SimCell(mu1=1.0, mu2=0.0, sigma=1.0, n1=10, n2=10, lam=1.0,
                   reps=100, seed=5)

    rows = []
    for n in (100, 1000, 10000):
        d = _design(n, n)
        rows.append((f"kernel n={2*n}", lambda d=d: value_score_hessian(d, theta)))
    d_fit = _design(500, 500)
    rows.append(("fit n=1000", lambda: fit(d_fit, spec)))
    rows.append(("cell 100 reps", lambda: run_table_cell(cell)))

    width = max(len(label) for label, _ in rows)
    header = f"{'case':<{width}}  " + "".join(f"{n:>12}" for n in names)
    print(header + ("       ratio" if len(names) == 2 else ""))
    for label, fn in rows:
        per = {}
        for name in names:
            with backend.forced(name):
                per[name] = _time(fn)
        line = f"{label:<{width}}  " + "".join(f"{per[n]*1e3:>10.3f}ms" for n in names)
        if len(names) == 2:
            line += f"  {per['python'] / per['c']:>9.2f}x"
        print(line)


if __name__ == "__main__":
    main()
