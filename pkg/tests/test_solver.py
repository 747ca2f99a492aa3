import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from storagevalue.lp import from_arrays
from storagevalue.solver import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    SolverOptions,
    solve,
    verify_kkt,
)
from storagevalue.solver import _kernels_py, kernels
from storagevalue.solver.simplex import _LUFactor

from oracles import random_lp, vertex_optimum

needs_compiled = pytest.mark.skipif(not kernels.COMPILED, reason="compiled kernels not built")


# ------------------------------------------------------------ vertex oracle
def brute_force_optimum(c, G, h, E, e):
    """Minimum of ``c.x`` over ``{G x <= h, E x = e}`` by solving every square subsystem.

    Bounds are folded into ``G``; slower than :func:`oracles.vertex_optimum`
    but shares no code with it.
    """
    n = len(c)
    k = n - len(e)
    combos = list(itertools.combinations(range(len(h)), k))
    combos = np.array(combos, dtype=int).reshape(len(combos), k)
    M = np.concatenate([np.broadcast_to(E, (len(combos),) + E.shape), G[combos]], axis=1)
    rhs = np.concatenate([np.broadcast_to(e, (len(combos), len(e))), h[combos]], axis=1)
    ok = np.abs(np.linalg.det(M)) > 1e-9
    if not ok.any():
        return None
    X = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    feas = np.all(X @ G.T <= h + 1e-7, axis=1)
    if len(e):
        feas &= np.all(np.abs(X @ E.T - e) <= 1e-7, axis=1)
    if not feas.any():
        return None
    return float((X[feas] @ c).min())


def test_oracles_agree():
    rng = np.random.default_rng(21)
    for _ in range(60):
        _, (c, A, sense, b, lo, hi) = random_lp(rng, max_vars=5, max_rows=4)
        n = len(c)
        G = np.vstack([A[sense == "L"], -A[sense == "G"], np.eye(n), -np.eye(n)])
        h = np.concatenate([b[sense == "L"], -b[sense == "G"], hi, -lo])
        a = vertex_optimum(c, A, sense, b, lo, hi)
        r = brute_force_optimum(c, G, h, A[sense == "E"], b[sense == "E"])
        assert (a is None) == (r is None)
        if a is not None:
            assert a == pytest.approx(r, abs=1e-9)


@pytest.mark.parametrize("compiled", [None, False])
def test_random_programs_match_vertex_enumeration(compiled):
    rng = np.random.default_rng(7)
    opts = SolverOptions(compiled=compiled)
    counts = {OPTIMAL: 0, INFEASIBLE: 0}
    for _ in range(100 if compiled is None else 40):
        lp, data = random_lp(rng, max_vars=6, max_rows=6)
        best = vertex_optimum(*data)
        sol = solve(lp, opts)
        if best is None:
            assert sol.status == INFEASIBLE
        else:
            assert sol.status == OPTIMAL
            assert sol.objective == pytest.approx(best, abs=1e-7)
            assert verify_kkt(lp, sol, 1e-7).passed
        counts[sol.status] += 1
    assert counts[OPTIMAL] > 0 and counts[INFEASIBLE] > 0


def test_duals_are_rhs_derivatives():
    lp = from_arrays([2.0, 3.0], A_ge=[[1, 1], [1, 0]], b_ge=[4, 1], upper=[3, 10])
    sol = solve(lp)
    step = 1e-3
    for i in range(lp.n_rows):
        lp2 = from_arrays([2.0, 3.0], A_ge=[[1, 1], [1, 0]], b_ge=[4 + step * (i == 0), 1 + step * (i == 1)],
                          upper=[3, 10])
        fd = (solve(lp2).objective - sol.objective) / step
        assert sol.dual[i] == pytest.approx(fd, abs=1e-6)
    assert np.allclose(sol.reduced_cost, lp.c - lp.A.T @ sol.dual)


def test_certificate_detects_perturbation():
    lp = from_arrays([1.0, 1.0], A_ge=[[1, 2]], b_ge=[4], upper=[10, 10])
    sol = solve(lp)
    assert verify_kkt(lp, sol).passed
    bad = type(sol)(**{**sol.__dict__, "primal": sol.primal + np.array([0.0, -0.1])})
    report = verify_kkt(lp, bad)
    assert not report.passed and report.primal_residual > 1e-3
    bad = type(sol)(**{**sol.__dict__, "dual": -sol.dual})
    assert not verify_kkt(lp, bad).passed
    with pytest.raises(ValueError):
        verify_kkt(lp, type(sol)(**{**sol.__dict__, "status": INFEASIBLE}))


def test_unbounded_and_iteration_limit():
    lp = from_arrays([-1.0, 0.0], A_ub=[[1, -1]], b_ub=[1])
    assert solve(lp).status == UNBOUNDED
    rng = np.random.default_rng(3)
    A = rng.uniform(0.5, 2.0, (6, 6))
    lp = from_arrays(-np.ones(6), A_ub=A, b_ub=np.ones(6))
    assert solve(lp, SolverOptions(max_iterations=1)).status == ITERATION_LIMIT
    assert np.isnan(solve(lp, SolverOptions(max_iterations=1)).objective)


def test_free_variables_and_offset():
    lp = from_arrays([1.0, -1.0], A_eq=[[1, 1]], b_eq=[2], A_ge=[[1, -1]], b_ge=[-4],
                     lower=[-np.inf, -np.inf], upper=[np.inf, np.inf], offset=10.0)
    sol = solve(lp)
    assert sol.status == OPTIMAL
    assert sol.primal.tolist() == pytest.approx([-1.0, 3.0])
    assert sol.objective == pytest.approx(6.0)


@pytest.mark.parametrize("kwargs", [dict(feasibility_tol=0), dict(pivot_tol=-1), dict(max_iterations=0),
                                    dict(refactor_interval=0)])
def test_solver_options_validation(kwargs):
    with pytest.raises(ValueError):
        SolverOptions(**kwargs)


def test_solution_arrays_are_read_only():
    sol = solve(from_arrays([1.0], A_ge=[[1.0]], b_ge=[1.0]))
    with pytest.raises(ValueError):
        sol.primal[0] = 0.0


# ------------------------------------------------- compiled vs pure kernels
@needs_compiled
def test_select_entering_equivalence():
    comp = kernels.get(True)
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(1, 30))
        d = rng.normal(size=n)
        status = rng.integers(0, 4, n).astype(np.int8)
        lo = np.where(rng.random(n) < 0.2, -np.inf, 0.0)
        hi = np.where(rng.random(n) < 0.1, lo, 1.0)
        for bland in (False, True):
            assert comp.select_entering(d, status, lo, hi, 0.3, bland) == \
                _kernels_py.select_entering(d, status, lo, hi, 0.3, bland)


@needs_compiled
def test_ratio_test_equivalence():
    comp = kernels.get(True)
    rng = np.random.default_rng(12)
    for _ in range(300):
        m = int(rng.integers(1, 20))
        lo = np.where(rng.random(m) < 0.3, -np.inf, rng.uniform(-1, 0, m))
        hi = np.where(rng.random(m) < 0.3, np.inf, rng.uniform(1, 2, m))
        x = np.clip(rng.uniform(-1, 2, m), np.where(np.isfinite(lo), lo, -5), np.where(np.isfinite(hi), hi, 5))
        alpha = np.where(rng.random(m) < 0.3, 0.0, rng.normal(size=m))
        basis = rng.permutation(m).astype(np.int64)
        for direction in (1.0, -1.0):
            a = comp.ratio_test(x, lo, hi, alpha, basis, direction, 1e-9, 1e-11)
            b = _kernels_py.ratio_test(x, lo, hi, alpha, basis, direction, 1e-9, 1e-11)
            assert a[0] == b[0] and a[2] == b[2]
            assert a[1] == pytest.approx(b[1], rel=1e-12)


@needs_compiled
def test_eta_and_triangular_solves_match_superlu():
    comp = kernels.get(True)
    rng = np.random.default_rng(13)
    for _ in range(30):
        m = int(rng.integers(2, 40))
        B = (sp.random(m, m, density=0.15, random_state=rng) + sp.eye(m) * 3).tocsc()
        rhs = rng.normal(size=m)
        rhs[rng.random(m) < 0.3] = 0.0
        fast, slow = _LUFactor(B, comp), _LUFactor(B, _kernels_py)
        assert np.allclose(fast.solve(rhs), slow.solve(rhs), atol=1e-10)
        assert np.allclose(fast.solve_t(rhs), slow.solve_t(rhs), atol=1e-10)
        assert np.allclose(B @ fast.solve(rhs), rhs, atol=1e-9)
        # the numpy triangular solves agree with the compiled ones
        for T in (fast.L, fast.U):
            v1, v2 = rhs.copy(), rhs.copy()
            (comp.lower_solve if T is fast.L else comp.upper_solve)(*T, v1)
            (_kernels_py.lower_solve if T is fast.L else _kernels_py.upper_solve)(*T, v2)
            assert np.allclose(v1, v2, atol=1e-12)
        # product-form updates
        k = 3
        ptr = np.zeros(k + 1, dtype=np.int64)
        idx, val = [], []
        rows = rng.integers(0, m, k).astype(np.int64)
        for j in range(k):
            nz = np.setdiff1d(rng.choice(m, size=min(4, m), replace=False), [rows[j]])
            idx.extend(nz)
            val.extend(rng.normal(size=len(nz)))
            ptr[j + 1] = len(idx)
        idx, val = np.array(idx, dtype=np.int64), np.array(val)
        piv = rng.uniform(1, 2, k)
        for fn in ("eta_ftran", "eta_btran"):
            v1, v2 = rhs.copy(), rhs.copy()
            getattr(comp, fn)(v1, ptr, idx, val, rows, piv, k)
            getattr(_kernels_py, fn)(v2, ptr, idx, val, rows, piv, k)
            assert np.allclose(v1, v2, atol=1e-12)


def test_pure_and_default_kernels_agree_on_objective():
    rng = np.random.default_rng(5)
    A = rng.uniform(0, 1, (12, 20))
    lp = from_arrays(-rng.uniform(0, 1, 20), A_ub=A, b_ub=np.ones(12), upper=np.full(20, 2.0))
    a = solve(lp, SolverOptions(compiled=False))
    b = solve(lp)
    assert not a.compiled_kernels
    assert a.objective == pytest.approx(b.objective, rel=1e-10)
