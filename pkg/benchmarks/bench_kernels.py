"""Compiled versus pure-Python simplex kernels.

Times each inner-loop kernel on random data of a realistic size and then a
full solve of a bundled fixture with both kernel sets.

    python3 benchmarks/bench_kernels.py [--bundle wind-lull] [--repeat 5]
"""
import argparse
import timeit

import numpy as np
import scipy.sparse as sp

from storagevalue import testnets
from storagevalue.formulation import build_problem
from storagevalue.ingest import parse_network_bundle, parse_scenario
from storagevalue.solver import SolverOptions, solve
from storagevalue.solver import _kernels_py, kernels
from storagevalue.solver.simplex import _LUFactor


def kernel_cases(m, rng):
    n = 3 * m
    d = rng.normal(size=n)
    status = rng.integers(0, 4, n).astype(np.int8)
    lo, hi = np.zeros(n), np.ones(n)
    x = rng.uniform(0, 1, m)
    lb, ub = np.zeros(m), np.ones(m)
    alpha = np.where(rng.random(m) < 0.9, 0.0, rng.normal(size=m))
    basis = np.arange(m, dtype=np.int64)
    # banded basis: sparse factors like the network LPs, unlike a uniform random matrix
    offsets = (-7, -2, -1, 1, 3)
    B = (sp.diags([rng.normal(size=m - abs(o)) for o in offsets], offsets) + sp.eye(m) * 8).tocsc()
    rhs = np.where(rng.random(m) < 0.95, 0.0, rng.normal(size=m))
    k = 50
    ptr = np.arange(0, 5 * (k + 1), 5, dtype=np.int64)
    idx = rng.integers(0, m, 5 * k).astype(np.int64)
    val = rng.normal(size=5 * k)
    rows = rng.integers(0, m, k).astype(np.int64)
    piv = rng.uniform(1, 2, k)

    def cases(kern):
        lu = _LUFactor(B, kern)
        return {
            "select_entering": lambda: kern.select_entering(d, status, lo, hi, 1e-7, False),
            "ratio_test": lambda: kern.ratio_test(x, lb, ub, alpha, basis, 1.0, 1e-9, 1e-11),
            "eta_ftran": lambda: kern.eta_ftran(rhs.copy(), ptr, idx, val, rows, piv, k),
            "eta_btran": lambda: kern.eta_btran(rhs.copy(), ptr, idx, val, rows, piv, k),
            "lu_solve": lambda: lu.solve(rhs),
            "lu_solve_t": lambda: lu.solve_t(rhs),
        }

    return cases


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--bundle", default="wind-lull", help="fixture bundle for the full solve")
    p.add_argument("--scenario", default="fixed_ep")
    p.add_argument("--rows", type=int, default=20000, help="basis dimension of the kernel cases")
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if not kernels.COMPILED:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
    compiled = kernels.get(True)

    cases = kernel_cases(args.rows, np.random.default_rng(0))
    fast, slow = cases(compiled), cases(_kernels_py)
    print(f"{'kernel':<18}{'compiled us':>14}{'python us':>14}{'speedup':>10}")
    for name in fast:
        t_c = min(timeit.repeat(fast[name], number=20, repeat=args.repeat)) / 20 * 1e6
        t_p = min(timeit.repeat(slow[name], number=20, repeat=args.repeat)) / 20 * 1e6
        print(f"{name:<18}{t_c:>14.1f}{t_p:>14.1f}{t_p / t_c:>10.1f}")

    net = parse_network_bundle(testnets.fixture_path(args.bundle))
    lp = build_problem(net, parse_scenario(testnets.scenario_path(args.scenario)))
    print(f"\nfull solve {args.bundle}/{args.scenario}: {lp.n_rows} rows, {lp.n_vars} columns")
    results = {}
    for label, flag in (("compiled", True), ("python", False)):
        sol = solve(lp, SolverOptions(compiled=flag))
        results[label] = sol
        print(f"{label:<10} {sol.solve_seconds:8.2f} s  iterations={sol.iterations}  objective={sol.objective:.6f}")
    a, b = results["compiled"].objective, results["python"].objective
    print(f"objective difference {abs(a - b):.2e}; speedup {results['python'].solve_seconds / results['compiled'].solve_seconds:.1f}x")


if __name__ == "__main__":
    main()
