"""Equality form with bounded variables, plus equilibration scaling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..lp import EQ, GE, LE, LinearProgram


@dataclass(frozen=True)
class StandardForm:
    """``min c.x'  s.t.  A x' = b,  lower <= x' <= upper`` in scaled units.

    Columns ``0..n_orig-1`` are the original variables divided by
    ``col_scale``; the remaining columns are unit slacks, one per inequality
    row (``slack_rows`` names the row).  Equality rows get no slack.  Free
    variables are kept as single columns; the simplex moves them in both
    directions without splitting.
    """

    A: sp.csc_matrix
    b: np.ndarray
    c: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    n_orig: int
    slack_rows: np.ndarray
    slack_cols: np.ndarray  # per row: slack column or -1
    row_scale: np.ndarray
    col_scale: np.ndarray

    def to_original(self, x_std: np.ndarray) -> np.ndarray:
        return x_std[: self.n_orig] * self.col_scale[: self.n_orig]

    def from_original(self, lp: LinearProgram, x: np.ndarray) -> np.ndarray:
        x_std = np.empty(self.A.shape[1])
        x_std[: self.n_orig] = x / self.col_scale[: self.n_orig]
        act = lp.A @ x
        rows = self.slack_rows
        x_std[self.n_orig :] = (lp.rhs[rows] - act[rows]) * self.row_scale[rows]
        return x_std

    def unscale_duals(self, y_std: np.ndarray, d_std: np.ndarray):
        return y_std * self.row_scale, d_std[: self.n_orig] / self.col_scale[: self.n_orig]


def _pow2(v: np.ndarray) -> np.ndarray:
    return np.exp2(np.round(np.log2(v)))


def equilibrate(A: sp.csr_matrix, passes: int = 6):
    """Geometric-mean row/column scaling rounded to powers of two.

    Returns ``(row_scale, col_scale)`` such that ``diag(r) A diag(s)`` has
    entries close to one in magnitude.  Powers of two keep unscaling exact.
    """
    m, n = A.shape
    r = np.ones(m)
    s = np.ones(n)
    if A.nnz == 0:
        return r, s
    absA = abs(sp.csr_matrix(A))
    for _ in range(passes):
        M = sp.diags(r) @ absA @ sp.diags(s)
        M = M.tocsr()
        rmax = M.max(axis=1).toarray().ravel()
        rmin = _min_nonzero(M, axis=1, size=m)
        ok = rmax > 0
        r[ok] /= np.sqrt(rmax[ok] * rmin[ok])
        M = (sp.diags(r) @ absA @ sp.diags(s)).tocsc()
        cmax = M.max(axis=0).toarray().ravel()
        cmin = _min_nonzero(M.tocsc(), axis=0, size=n)
        ok = cmax > 0
        s[ok] /= np.sqrt(cmax[ok] * cmin[ok])
    # final pass: bring the largest entry of each row to about one
    M = (sp.diags(r) @ absA @ sp.diags(s)).tocsr()
    rmax = M.max(axis=1).toarray().ravel()
    ok = rmax > 0
    r[ok] /= rmax[ok]
    return _pow2(r), _pow2(s)


def _min_nonzero(M, axis, size):
    out = np.full(size, np.inf)
    if axis == 1:
        M = M.tocsr()
    else:
        M = M.tocsc()
    ptr, data = M.indptr, M.data
    counts = np.diff(ptr)
    nonempty = counts > 0
    if data.size:
        mins = np.minimum.reduceat(data, ptr[:-1][nonempty])
        out[nonempty] = mins
    out[~nonempty] = 1.0
    return out


def to_standard_form(lp: LinearProgram, scaling: bool = True) -> StandardForm:
    lp.check()
    m, n = lp.n_rows, lp.n_vars
    A = lp.A
    if scaling:
        r, s = equilibrate(A)
    else:
        r, s = np.ones(m), np.ones(n)
    As = (sp.diags(r) @ A @ sp.diags(s)).tocsc()
    ineq = np.flatnonzero(lp.sense != EQ)
    k = len(ineq)
    S = sp.csc_matrix((np.ones(k), (ineq, np.arange(k))), shape=(m, k))
    full = sp.hstack([As, S], format="csc")
    full.sort_indices()
    slack_cols = np.full(m, -1, dtype=np.int64)
    slack_cols[ineq] = n + np.arange(k)
    s_lo = np.where(lp.sense[ineq] == LE, 0.0, -np.inf)
    s_hi = np.where(lp.sense[ineq] == GE, 0.0, np.inf)
    with np.errstate(invalid="ignore"):
        lower = np.concatenate([lp.lower / s, s_lo])
        upper = np.concatenate([lp.upper / s, s_hi])
    col_scale = np.concatenate([s, 1.0 / r[ineq]])
    return StandardForm(
        A=full,
        b=lp.rhs * r,
        c=np.concatenate([lp.c * s, np.zeros(k)]),
        lower=lower,
        upper=upper,
        n_orig=n,
        slack_rows=ineq,
        slack_cols=slack_cols,
        row_scale=r,
        col_scale=col_scale,
    )
