"""Bounded-variable primal revised simplex.

Works on ``min c.x  s.t.  A x = b,  l <= x <= u`` (see :mod:`.standard`).  The
basis is factorised with SuperLU and updated in product form between
refactorisations.  Phase 1 minimises the sum of artificial columns added for
rows whose initial slack is not feasible.
"""
from __future__ import annotations

import time

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels_py, kernels
from ._kernels_py import AT_LOWER, AT_UPPER, BASIC, FREE_ZERO

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

_DEGENERATE_STEP = 1e-12
_DROP = 1e-14


class SingularBasis(RuntimeError):
    pass


class _EtaFile:
    """Product-form basis updates stored as flat CSR-like arrays."""

    def __init__(self, m: int, capacity: int):
        self.m = m
        self.capacity = capacity
        self.ptr = np.zeros(capacity + 1, dtype=np.int64)
        self.row = np.zeros(capacity, dtype=np.int64)
        self.piv = np.zeros(capacity, dtype=float)
        self.idx = np.zeros(16 * m + 16, dtype=np.int64)
        self.val = np.zeros(16 * m + 16, dtype=float)
        self.n = 0

    def clear(self):
        self.n = 0

    def push(self, r: int, alpha: np.ndarray):
        nz = np.flatnonzero(np.abs(alpha) > _DROP)
        nz = nz[nz != r]
        start = self.ptr[self.n]
        end = start + len(nz)
        if end > len(self.idx):
            grow = max(end, 2 * len(self.idx))
            self.idx = np.resize(self.idx, grow)
            self.val = np.resize(self.val, grow)
        self.idx[start:end] = nz
        self.val[start:end] = alpha[nz]
        self.row[self.n] = r
        self.piv[self.n] = alpha[r]
        self.n += 1
        self.ptr[self.n] = end


class _LUFactor:
    """SuperLU factors of the basis with optional compiled triangular solves.

    SuperLU's own ``solve`` carries noticeable per-call overhead; with the
    compiled kernels the factors are copied out once and both solves run as
    plain sparse substitutions.
    """

    def __init__(self, B, kern):
        try:
            self.lu = spla.splu(B, permc_spec="COLAMD", options={"SymmetricMode": False})
        except RuntimeError as exc:
            raise SingularBasis(str(exc)) from exc
        self.fast = kern is not _kernels_py
        if self.fast:
            self.kern = kern
            L, U = self.lu.L, self.lu.U
            self.L = self._arrays(L.tocsc())
            self.U = self._arrays(U.tocsc())
            self.Lt = self._arrays(L.T.tocsc())
            self.Ut = self._arrays(U.T.tocsc())
            self.perm_r = self.lu.perm_r
            self.perm_c = self.lu.perm_c

    @staticmethod
    def _arrays(M):
        M.sort_indices()
        return (M.indptr.astype(np.intc), M.indices.astype(np.intc), np.ascontiguousarray(M.data, dtype=float))

    def solve(self, rhs):
        if not self.fast:
            return self.lu.solve(rhs)
        v = np.empty_like(rhs)
        v[self.perm_r] = rhs
        self.kern.lower_solve(*self.L, v)
        self.kern.upper_solve(*self.U, v)
        return v[self.perm_c]

    def solve_t(self, rhs):
        if not self.fast:
            return self.lu.solve(rhs, trans="T")
        v = np.empty_like(rhs)
        v[self.perm_c] = rhs
        self.kern.lower_solve(*self.Ut, v)
        self.kern.upper_solve(*self.Lt, v)
        return v[self.perm_r]


class BoundedSimplex:
    """One solve of an equality-form program with bounds.

    Parameters mirror :class:`~storagevalue.solver.SolverOptions`; ``kern``
    selects the kernel module (compiled or numpy).
    """

    def __init__(self, A, b, c, lower, upper, opts, kern=None):
        self.A = sp.csc_matrix(A, dtype=float)
        self.m, self.n = self.A.shape
        self.b = np.asarray(b, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.lower = np.asarray(lower, dtype=float).copy()
        self.upper = np.asarray(upper, dtype=float).copy()
        self.opts = opts
        self.kern = kern or kernels.default
        self.iterations = 0
        self.phase1_iterations = 0
        self.bland_switches = 0

    # ------------------------------------------------------------------ setup
    def _initial_point(self, slack_cols):
        n = self.n
        lo, hi = self.lower, self.upper
        x = np.zeros(n)
        status = np.empty(n, dtype=np.int8)
        fin_lo, fin_hi = np.isfinite(lo), np.isfinite(hi)
        x[fin_lo] = lo[fin_lo]
        status[fin_lo] = AT_LOWER
        only_hi = ~fin_lo & fin_hi
        x[only_hi] = hi[only_hi]
        status[only_hi] = AT_UPPER
        free = ~fin_lo & ~fin_hi
        status[free] = FREE_ZERO

        basis = np.full(self.m, -1, dtype=np.int64)
        # slack_cols[i] is the slack column of row i or -1
        resid = self.b - self.A @ x
        art_rows, art_signs = [], []
        tol = self.opts.feasibility_tol
        for i in range(self.m):
            j = slack_cols[i]
            if j >= 0:
                # slack columns are unit columns in standard form
                val = x[j] + resid[i]
                if lo[j] - tol <= val <= hi[j] + tol:
                    x[j] = val
                    basis[i] = j
                    status[j] = BASIC
                    resid[i] = 0.0
                    continue
            art_rows.append(i)
            art_signs.append(1.0 if resid[i] >= 0 else -1.0)
        return x, status, basis, np.array(art_rows, dtype=np.int64), np.array(art_signs), resid

    def _append_artificials(self, rows, signs):
        k = len(rows)
        if k == 0:
            return
        art = sp.csc_matrix((signs, (rows, np.arange(k))), shape=(self.m, k))
        self.A = sp.hstack([self.A, art], format="csc")
        self.c = np.concatenate([self.c, np.zeros(k)])
        self.lower = np.concatenate([self.lower, np.zeros(k)])
        self.upper = np.concatenate([self.upper, np.full(k, np.inf)])
        self.n_art = k

    # ------------------------------------------------------------- linear alg
    def _factor(self):
        self.lu = _LUFactor(self.A[:, self.basis].tocsc(), self.kern)
        self.eta.clear()
        self.pivots_since_refactor = 0

    def _ftran(self, rhs):
        v = self.lu.solve(rhs)
        if self.eta.n:
            e = self.eta
            self.kern.eta_ftran(v, e.ptr, e.idx, e.val, e.row, e.piv, e.n)
        return v

    def _btran(self, rhs):
        w = np.array(rhs, dtype=float)
        if self.eta.n:
            e = self.eta
            self.kern.eta_btran(w, e.ptr, e.idx, e.val, e.row, e.piv, e.n)
        return self.lu.solve_t(w)

    def _recompute_basic(self):
        nonbasic = self.status != BASIC
        rhs = self.b - self.A[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self._ftran(rhs)

    def _column(self, j):
        col = np.zeros(self.m)
        start, end = self.A.indptr[j], self.A.indptr[j + 1]
        col[self.A.indices[start:end]] = self.A.data[start:end]
        return col

    # ------------------------------------------------------------------ loop
    def _iterate(self, cost, max_iter):
        opts = self.opts
        kern = self.kern
        AT = self.A.T.tocsr()
        degenerate_run = 0
        bland = False
        while True:
            if self.iterations >= max_iter:
                return ITERATION_LIMIT
            y = self._btran(cost[self.basis])
            d = cost - AT @ y
            d[self.basis] = 0.0
            q = kern.select_entering(d, self.status, self.lower, self.upper, opts.optimality_tol, bland)
            if q < 0:
                if self.eta.n:
                    # confirm optimality on a fresh factorisation
                    self._factor()
                    self._recompute_basic()
                    continue
                return OPTIMAL
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = self._ftran(self._column(q))
            xb = self.x[self.basis]
            lb, ub = self.lower[self.basis], self.upper[self.basis]
            row, theta, to_upper = kern.ratio_test(
                np.ascontiguousarray(xb), np.ascontiguousarray(lb), np.ascontiguousarray(ub),
                alpha, self.basis, direction, opts.feasibility_tol, opts.pivot_tol,
            )
            span = self.upper[q] - self.lower[q]
            if row < 0 and not np.isfinite(span):
                return UNBOUNDED
            self.iterations += 1
            if row < 0 or span <= theta:
                # bound flip of the entering variable
                theta = span
                self.x[self.basis] = xb - direction * theta * alpha
                if self.status[q] == AT_LOWER:
                    self.x[q] = self.upper[q]
                    self.status[q] = AT_UPPER
                else:
                    self.x[q] = self.lower[q]
                    self.status[q] = AT_LOWER
            else:
                self.x[self.basis] = xb - direction * theta * alpha
                self.x[q] += direction * theta
                leaving = self.basis[row]
                if to_upper:
                    self.x[leaving] = self.upper[leaving]
                    self.status[leaving] = AT_UPPER
                else:
                    self.x[leaving] = self.lower[leaving]
                    self.status[leaving] = AT_LOWER
                if not (np.isfinite(self.lower[leaving]) or np.isfinite(self.upper[leaving])):
                    self.status[leaving] = FREE_ZERO
                self.basis[row] = q
                self.status[q] = BASIC
                self.eta.push(row, alpha)
                self.pivots_since_refactor += 1
                if self.pivots_since_refactor >= opts.refactor_interval:
                    self._factor()
                    self._recompute_basic()
            if theta <= _DEGENERATE_STEP:
                degenerate_run += 1
                if opts.anti_cycling and not bland and degenerate_run >= opts.stall_window:
                    bland = True
                    self.bland_switches += 1
            else:
                degenerate_run = 0
                bland = False

    def solve(self, slack_cols):
        """Run phase 1 and phase 2; returns a status string."""
        t0 = time.perf_counter()
        self.n_art = 0
        n_struct = self.n
        x, status, basis, art_rows, art_signs, resid = self._initial_point(slack_cols)
        self._append_artificials(art_rows, art_signs)
        k = self.n_art
        self.x = np.concatenate([x, np.abs(resid[art_rows])]) if k else x
        self.status = np.concatenate([status, np.full(k, BASIC, dtype=np.int8)]) if k else status
        basis[art_rows] = n_struct + np.arange(k)
        self.basis = basis
        self.eta = _EtaFile(self.m, self.opts.refactor_interval + 1)
        self._factor()
        self._recompute_basic()

        if k:
            cost1 = np.zeros(len(self.c))
            cost1[n_struct:] = 1.0
            st = self._iterate(cost1, self.opts.max_iterations)
            self.phase1_iterations = self.iterations
            if st == ITERATION_LIMIT:
                self.elapsed = time.perf_counter() - t0
                return st
            infeas = float(self.x[n_struct:].sum())
            scale = max(1.0, float(np.abs(self.b).max(initial=0.0)))
            if infeas > self.opts.feasibility_tol * scale:
                self.elapsed = time.perf_counter() - t0
                return INFEASIBLE
            # artificials are pinned at zero for phase 2
            self.upper[n_struct:] = 0.0
            nb = self.status[n_struct:] != BASIC
            self.x[n_struct:][nb] = 0.0
            self.status[n_struct:][nb] = AT_LOWER
        status = self._iterate(self.c, self.opts.max_iterations)
        if status == OPTIMAL:
            self._factor()
            self._recompute_basic()
        self.elapsed = time.perf_counter() - t0
        return status

    def duals(self):
        """Row duals and reduced costs for the current basis (scaled space)."""
        y = self._btran(self.c[self.basis])
        d = self.c - self.A.T @ y
        d[self.basis] = 0.0
        return y, d
