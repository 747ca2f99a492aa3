"""Pure numpy versions of the simplex inner-loop kernels.

Semantics match ``_kernels.pyx`` exactly; the compiled module is preferred
when it imports.
"""
import numpy as np

BASIC = 0
AT_LOWER = 1
AT_UPPER = 2
FREE_ZERO = 3


def select_entering(d, status, lower, upper, tol, bland):
    """Index of the entering column, or -1 when no reduced cost is attractive.

    Dantzig rule (largest violation) unless ``bland`` is set, in which case
    the lowest eligible index wins.
    """
    movable = upper > lower
    score = np.zeros_like(d)
    at_lo = (status == AT_LOWER) & movable & (d < -tol)
    at_up = (status == AT_UPPER) & movable & (d > tol)
    free = (status == FREE_ZERO) & (np.abs(d) > tol)
    eligible = at_lo | at_up | free
    if not eligible.any():
        return -1
    if bland:
        return int(np.argmax(eligible))
    score[eligible] = np.abs(d[eligible])
    return int(np.argmax(score))


def ratio_test(x_b, lower_b, upper_b, alpha, basis, direction, feas_tol, pivot_tol):
    """Two-pass (Harris) bounded ratio test.

    The entering variable moves by ``direction * theta``; basic variable ``i``
    changes by ``-direction * alpha[i] * theta``.  Returns ``(row, theta,
    to_upper)`` with ``row == -1`` when no basic variable blocks.
    """
    delta = -direction * alpha
    big = np.abs(alpha) > pivot_tol
    dec = big & (delta < 0) & np.isfinite(lower_b)
    inc = big & (delta > 0) & np.isfinite(upper_b)
    if not (dec.any() or inc.any()):
        return -1, np.inf, False
    relaxed = np.full(len(x_b), np.inf)
    exact = np.full(len(x_b), np.inf)
    relaxed[dec] = (x_b[dec] - lower_b[dec] + feas_tol) / -delta[dec]
    exact[dec] = (x_b[dec] - lower_b[dec]) / -delta[dec]
    relaxed[inc] = (upper_b[inc] + feas_tol - x_b[inc]) / delta[inc]
    exact[inc] = (upper_b[inc] - x_b[inc]) / delta[inc]
    theta_max = relaxed.min()
    cand = np.flatnonzero(exact <= theta_max)
    mag = np.abs(alpha[cand])
    best = mag.max()
    ties = cand[mag == best]
    row = int(ties[np.argmin(basis[ties])])
    theta = max(exact[row], 0.0)
    return row, float(theta), bool(inc[row])


def eta_ftran(v, eta_ptr, eta_idx, eta_val, eta_row, eta_piv, n_eta):
    for k in range(n_eta):
        r = eta_row[k]
        vr = v[r] / eta_piv[k]
        if vr != 0.0:
            sl = slice(eta_ptr[k], eta_ptr[k + 1])
            v[eta_idx[sl]] -= eta_val[sl] * vr
        v[r] = vr


def eta_btran(w, eta_ptr, eta_idx, eta_val, eta_row, eta_piv, n_eta):
    for k in range(n_eta - 1, -1, -1):
        r = eta_row[k]
        sl = slice(eta_ptr[k], eta_ptr[k + 1])
        w[r] = (w[r] - eta_val[sl] @ w[eta_idx[sl]]) / eta_piv[k]


def lower_solve(ptr, idx, val, v):
    """In-place ``v <- T^-1 v`` for a lower-triangular CSC matrix ``T``."""
    n = len(v)
    for j in range(n):
        if v[j] == 0.0:
            continue
        seg = slice(ptr[j], ptr[j + 1])
        rows, vals = idx[seg], val[seg]
        on_diag = rows == j
        diag = vals[on_diag][0] if on_diag.any() else 1.0
        v[j] = v[j] / diag
        below = rows > j
        v[rows[below]] -= vals[below] * v[j]


def upper_solve(ptr, idx, val, v):
    """In-place ``v <- T^-1 v`` for an upper-triangular CSC matrix ``T``."""
    n = len(v)
    for j in range(n - 1, -1, -1):
        if v[j] == 0.0:
            continue
        seg = slice(ptr[j], ptr[j + 1])
        rows, vals = idx[seg], val[seg]
        on_diag = rows == j
        diag = vals[on_diag][0] if on_diag.any() else 1.0
        v[j] = v[j] / diag
        above = rows < j
        v[rows[above]] -= vals[above] * v[j]
