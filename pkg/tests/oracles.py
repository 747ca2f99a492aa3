"""Independent reference computations used by the test suites."""
import itertools

import numpy as np

from storagevalue.lp import from_arrays


def vertex_optimum(c, A, sense, b, lo, hi, tol=1e-7):
    """Minimum of ``c.x`` over a box-bounded polytope by enumerating its vertices.

    A vertex has ``k`` active rows ``S`` (every equality row among them), ``k``
    basic columns ``J`` solved from ``A[S, J] x_J = b_S - A[S, rest] x_rest``,
    and every other variable at one of its two finite bounds.  All
    combinations are generated, the systems for one ``S`` are solved in a
    single batched call, and the cheapest feasible point is returned.
    ``None`` means no vertex is feasible, hence the region is empty.
    """
    c, A, b, lo, hi = (np.asarray(v, dtype=float) for v in (c, A, b, lo, hi))
    sense = np.asarray(sense)
    m, n = A.shape
    eq = set(np.flatnonzero(sense == "E"))
    points = []
    for k in range(len(eq), min(m, n) + 1):
        combos = list(itertools.combinations(range(n), k))
        J_all = np.array(combos, dtype=int).reshape(len(combos), k)
        rest_all = np.array([[j for j in range(n) if j not in J] for J in combos], dtype=int).reshape(len(combos), n - k)
        patterns = list(itertools.product((0, 1), repeat=n - k))
        bits = np.array(patterns, dtype=bool).reshape(len(patterns), n - k)
        # (nJ, patterns, n-k) values of the non-basic variables
        P = np.where(bits[None], hi[rest_all][:, None, :], lo[rest_all][:, None, :])
        for S in itertools.combinations(range(m), k):
            if not eq <= set(S):
                continue
            S = list(S)
            X = np.empty((len(J_all), len(bits), n))
            np.put_along_axis(X, np.broadcast_to(rest_all[:, None, :], P.shape), P, axis=2)
            if k == 0:
                points.append(X.reshape(-1, n))
                continue
            M = A[S][:, J_all].transpose(1, 0, 2)  # (nJ, k, k)
            ok = np.abs(np.linalg.det(M)) > 1e-9
            if not ok.any():
                continue
            A_rest = A[S][:, rest_all].transpose(1, 0, 2)  # (nJ, k, n-k)
            rhs = b[S][None, None, :] - np.einsum("jpr,jkr->jpk", P, A_rest)
            xJ = np.linalg.solve(M[ok], rhs[ok].transpose(0, 2, 1)).transpose(0, 2, 1)
            X = X[ok]
            np.put_along_axis(X, np.broadcast_to(J_all[ok][:, None, :], xJ.shape), xJ, axis=2)
            points.append(X.reshape(-1, n))
    if not points:
        return None
    X = np.concatenate(points)
    act = X @ A.T
    feas = np.all((X >= lo - tol) & (X <= hi + tol), axis=1)
    feas &= np.all(np.where(sense == "L", act <= b + tol, True), axis=1)
    feas &= np.all(np.where(sense == "G", act >= b - tol, True), axis=1)
    feas &= np.all(np.where(sense == "E", np.abs(act - b) <= tol, True), axis=1)
    if not feas.any():
        return None
    return float((X[feas] @ c).min())


def random_lp(rng, max_vars=8, max_rows=8):
    """Small integer LP with a finite box; about a third come out infeasible."""
    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(0, max_rows + 1))
    sense = rng.choice(np.array(["L", "G", "E"]), size=m, p=[0.5, 0.3, 0.2])
    A = rng.integers(-4, 5, (m, n)).astype(float)
    # keep equality rows independent and no more of them than variables
    eq = np.flatnonzero(sense == "E")
    while len(eq) > n or (len(eq) and np.linalg.matrix_rank(A[eq]) < len(eq)):
        sense[eq[0]] = "L"
        eq = np.flatnonzero(sense == "E")
    b = np.where(sense == "L", rng.integers(-3, 10, m), np.where(sense == "G", rng.integers(-8, 4, m),
                                                               rng.integers(-3, 4, m))).astype(float)
    c = rng.integers(-5, 6, n).astype(float)
    lo = -rng.integers(0, 4, n).astype(float)
    hi = rng.integers(1, 6, n).astype(float)
    rows = {s: np.flatnonzero(sense == s) for s in "LEG"}
    lp = from_arrays(c, A[rows["L"]] if len(rows["L"]) else None, b[rows["L"]],
                     A[rows["E"]] if len(rows["E"]) else None, b[rows["E"]],
                     A[rows["G"]] if len(rows["G"]) else None, b[rows["G"]], lo, hi)
    return lp, (c, A, sense, b, lo, hi)


def highs_objective(lp):
    """Optimal objective of ``lp`` from scipy's HiGHS interface (``None`` if not optimal)."""
    import scipy.sparse as sp
    from scipy.optimize import linprog

    A = lp.A.tocsr()
    le, ge, eq = lp.sense == "L", lp.sense == "G", lp.sense == "E"
    A_ub = sp.vstack([A[le], -A[ge]])
    b_ub = np.concatenate([lp.rhs[le], -lp.rhs[ge]])
    bounds = [(lo if np.isfinite(lo) else None, hi if np.isfinite(hi) else None)
              for lo, hi in zip(lp.lower, lp.upper)]
    r = linprog(lp.c, A_ub=A_ub if A_ub.shape[0] else None, b_ub=b_ub if len(b_ub) else None,
                A_eq=A[eq] if eq.any() else None, b_eq=lp.rhs[eq] if eq.any() else None,
                bounds=bounds, method="highs")
    return r.fun + lp.offset if r.status == 0 else None
