# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simplex inner-loop kernels (see ``_kernels_py`` for semantics)."""
from libc.math cimport fabs, INFINITY, isfinite

cdef enum:
    BASIC = 0
    AT_LOWER = 1
    AT_UPPER = 2
    FREE_ZERO = 3


def select_entering(const double[::1] d, const signed char[::1] status,
                    const double[::1] lower, const double[::1] upper,
                    double tol, bint bland):
    cdef Py_ssize_t j, n = d.shape[0], best = -1
    cdef double best_score = 0.0, dj, score
    cdef signed char st
    for j in range(n):
        st = status[j]
        if st == BASIC:
            continue
        dj = d[j]
        score = 0.0
        if st == AT_LOWER:
            if dj < -tol and upper[j] > lower[j]:
                score = -dj
        elif st == AT_UPPER:
            if dj > tol and upper[j] > lower[j]:
                score = dj
        elif st == FREE_ZERO:
            if fabs(dj) > tol:
                score = fabs(dj)
        if score > 0.0:
            if bland:
                return j
            if score > best_score:
                best_score = score
                best = j
    return best


def ratio_test(const double[::1] x_b, const double[::1] lower_b, const double[::1] upper_b,
               const double[::1] alpha, const long long[::1] basis, double direction,
               double feas_tol, double pivot_tol):
    cdef Py_ssize_t i, m = x_b.shape[0], row = -1
    cdef double theta_max = INFINITY, delta, a, r, best_mag = -1.0, ex
    cdef bint found = False, to_upper = False
    # pass 1: step length with bounds relaxed by the feasibility tolerance
    for i in range(m):
        a = alpha[i]
        if fabs(a) <= pivot_tol:
            continue
        delta = -direction * a
        if delta < 0:
            if not isfinite(lower_b[i]):
                continue
            r = (x_b[i] - lower_b[i] + feas_tol) / -delta
        else:
            if not isfinite(upper_b[i]):
                continue
            r = (upper_b[i] + feas_tol - x_b[i]) / delta
        found = True
        if r < theta_max:
            theta_max = r
    if not found:
        return -1, INFINITY, False
    # pass 2: largest pivot among rows blocking within theta_max
    cdef double best_exact = 0.0
    for i in range(m):
        a = alpha[i]
        if fabs(a) <= pivot_tol:
            continue
        delta = -direction * a
        if delta < 0:
            if not isfinite(lower_b[i]):
                continue
            ex = (x_b[i] - lower_b[i]) / -delta
        else:
            if not isfinite(upper_b[i]):
                continue
            ex = (upper_b[i] - x_b[i]) / delta
        if ex <= theta_max:
            if fabs(a) > best_mag or (fabs(a) == best_mag and basis[i] < basis[row]):
                best_mag = fabs(a)
                row = i
                best_exact = ex
                to_upper = delta > 0
    if best_exact < 0.0:
        best_exact = 0.0
    return row, best_exact, to_upper


def eta_ftran(double[::1] v, const long long[::1] eta_ptr, const long long[::1] eta_idx,
              const double[::1] eta_val, const long long[::1] eta_row,
              const double[::1] eta_piv, Py_ssize_t n_eta):
    cdef Py_ssize_t k, p, r
    cdef double vr
    for k in range(n_eta):
        r = eta_row[k]
        vr = v[r] / eta_piv[k]
        if vr != 0.0:
            for p in range(eta_ptr[k], eta_ptr[k + 1]):
                v[eta_idx[p]] -= eta_val[p] * vr
        v[r] = vr


def eta_btran(double[::1] w, const long long[::1] eta_ptr, const long long[::1] eta_idx,
              const double[::1] eta_val, const long long[::1] eta_row,
              const double[::1] eta_piv, Py_ssize_t n_eta):
    cdef Py_ssize_t k, p, r
    cdef double acc
    for k in range(n_eta - 1, -1, -1):
        r = eta_row[k]
        acc = w[r]
        for p in range(eta_ptr[k], eta_ptr[k + 1]):
            acc -= eta_val[p] * w[eta_idx[p]]
        w[r] = acc / eta_piv[k]


def lower_solve(const int[::1] ptr, const int[::1] idx, const double[::1] val, double[::1] v):
    """In-place ``v <- T^-1 v`` for a lower-triangular CSC matrix ``T``."""
    cdef Py_ssize_t j, p, n = v.shape[0]
    cdef double vj, diag
    for j in range(n):
        if v[j] == 0.0:
            continue
        diag = 1.0
        for p in range(ptr[j], ptr[j + 1]):
            if idx[p] == j:
                diag = val[p]
                break
        vj = v[j] / diag
        v[j] = vj
        for p in range(ptr[j], ptr[j + 1]):
            if idx[p] > j:
                v[idx[p]] -= val[p] * vj


def upper_solve(const int[::1] ptr, const int[::1] idx, const double[::1] val, double[::1] v):
    """In-place ``v <- T^-1 v`` for an upper-triangular CSC matrix ``T``."""
    cdef Py_ssize_t j, p, n = v.shape[0]
    cdef double vj, diag
    for j in range(n - 1, -1, -1):
        if v[j] == 0.0:
            continue
        diag = 1.0
        for p in range(ptr[j], ptr[j + 1]):
            if idx[p] == j:
                diag = val[p]
                break
        vj = v[j] / diag
        v[j] = vj
        for p in range(ptr[j], ptr[j + 1]):
            if idx[p] < j:
                v[idx[p]] -= val[p] * vj
