"""LP solution with primal and dual values and an optimality certificate."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..lp import EQ, GE, LE, LinearProgram
from . import kernels
from .simplex import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, UNBOUNDED, BoundedSimplex, SingularBasis
from .standard import StandardForm, equilibrate, to_standard_form

__all__ = [
    "SolverOptions",
    "Solution",
    "CertificateReport",
    "solve",
    "verify_kkt",
    "to_standard_form",
    "StandardForm",
    "equilibrate",
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
    "ITERATION_LIMIT",
    "SingularBasis",
]


@dataclass(frozen=True)
class SolverOptions:
    feasibility_tol: float = 1e-7
    optimality_tol: float = 1e-7
    pivot_tol: float = 1e-9
    max_iterations: int = 1_000_000
    anti_cycling: bool = True
    scaling: bool = True
    refactor_interval: int = 100
    stall_window: int = 1000
    compiled: object = None  # None: import-time default, True/False: force

    def __post_init__(self):
        for name in ("feasibility_tol", "optimality_tol", "pivot_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_iterations < 1 or self.refactor_interval < 1 or self.stall_window < 1:
            raise ValueError("iteration counts must be >= 1")


@dataclass(frozen=True)
class Solution:
    """Result of :func:`solve`.

    ``dual[i]`` is the derivative of the optimal objective with respect to
    the right-hand side of row ``i`` (non-positive on ``<=`` rows and
    non-negative on ``>=`` rows of a minimisation).  ``reduced_cost`` is
    ``c - A.T @ dual``.
    """

    status: str
    objective: float
    primal: np.ndarray
    dual: np.ndarray
    reduced_cost: np.ndarray
    iterations: int = 0
    solve_seconds: float = 0.0
    phase1_iterations: int = 0
    compiled_kernels: bool = False
    info: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def solve(lp: LinearProgram, opts: SolverOptions | None = None) -> Solution:
    """Solve ``lp`` with the bounded revised simplex.

    Infeasible, unbounded and iteration-limited runs are reported through
    ``status``; only a malformed program raises.
    """
    opts = opts or SolverOptions()
    t0 = time.perf_counter()
    sf = to_standard_form(lp, scaling=opts.scaling)
    kern = kernels.get(opts.compiled)
    engine = BoundedSimplex(sf.A, sf.b, sf.c, sf.lower, sf.upper, opts, kern)
    status = engine.solve(sf.slack_cols)
    n_std = sf.A.shape[1]
    x_std = engine.x[:n_std]
    x = sf.to_original(x_std)
    if status == OPTIMAL:
        y_std, d_std = engine.duals()
        y, d = sf.unscale_duals(y_std, d_std[:n_std])
        objective = lp.objective(x)
    else:
        y = np.full(lp.n_rows, np.nan)
        d = np.full(lp.n_vars, np.nan)
        objective = np.nan
    for arr in (x, y, d):
        arr.setflags(write=False)
    return Solution(
        status=status,
        objective=float(objective),
        primal=x,
        dual=y,
        reduced_cost=d,
        iterations=engine.iterations,
        solve_seconds=time.perf_counter() - t0,
        phase1_iterations=engine.phase1_iterations,
        compiled_kernels=kern is not kernels._kernels_py,
        info={"bland_switches": engine.bland_switches, "artificials": engine.n_art},
    )


@dataclass(frozen=True)
class CertificateReport:
    primal_residual: float
    dual_residual: float
    complementary_slackness: float
    duality_gap: float
    primal_objective: float
    dual_objective: float
    tol: float
    worst_row: str = ""
    worst_dual: str = ""

    @property
    def passed(self) -> bool:
        return max(self.primal_residual, self.dual_residual, self.complementary_slackness, self.duality_gap) <= self.tol

    def lines(self) -> list:
        verdict = "PASS" if self.passed else "FAIL"
        return [
            f"status={verdict} tol={self.tol:.1e}",
            f"primal_residual={self.primal_residual:.3e} worst_row={self.worst_row}",
            f"dual_residual={self.dual_residual:.3e} worst={self.worst_dual}",
            f"complementary_slackness={self.complementary_slackness:.3e}",
            f"duality_gap={self.duality_gap:.3e}",
            f"primal_objective={self.primal_objective:.12g}",
            f"dual_objective={self.dual_objective:.12g}",
        ]


def verify_kkt(lp: LinearProgram, solution: Solution, tol: float = 1e-6) -> CertificateReport:
    """Check primal feasibility, dual feasibility, complementarity and the gap.

    Residuals are relative: a row violation is divided by ``max(1, |b_i|)``,
    a reduced-cost sign violation by ``1 + |c_j| + sum_i |a_ij y_i|`` and
    complementarity products and the gap by ``max(1, |objective|)``.
    """
    if solution.status != OPTIMAL:
        raise ValueError(f"KKT check needs an optimal solution, got {solution.status!r}")
    x, y = np.asarray(solution.primal), np.asarray(solution.dual)
    A = lp.A
    names_r = lp.constraints.entries
    names_v = lp.variables.entries
    act = A @ x
    slack = lp.rhs - act

    row_viol = lp.row_violation(x) / np.maximum(1.0, np.abs(lp.rhs))
    bound_viol = np.maximum(lp.lower - x, 0.0) + np.maximum(x - lp.upper, 0.0)
    with np.errstate(invalid="ignore"):
        bound_viol = bound_viol / np.maximum(1.0, np.maximum(np.abs(np.where(np.isfinite(lp.lower), lp.lower, 0)),
                                                              np.abs(np.where(np.isfinite(lp.upper), lp.upper, 0))))
    primal_res = 0.0
    worst_row = ""
    if len(row_viol):
        i = int(np.argmax(row_viol))
        primal_res = float(row_viol[i])
        worst_row = names_r[i].name if names_r else str(i)
    if len(bound_viol) and bound_viol.max() > primal_res:
        j = int(np.argmax(bound_viol))
        primal_res = float(bound_viol[j])
        worst_row = f"bound:{names_v[j].name if names_v else j}"

    d = lp.c - A.T @ y
    scale_d = 1.0 + np.abs(lp.c) + abs(A).T @ np.abs(y)
    span = np.maximum(1.0, np.abs(x))
    at_lo = np.isfinite(lp.lower) & (x - lp.lower <= 1e-9 * span)
    at_hi = np.isfinite(lp.upper) & (lp.upper - x <= 1e-9 * span)
    dviol = np.where(at_lo & at_hi, 0.0, np.where(at_lo, np.maximum(-d, 0.0), np.where(at_hi, np.maximum(d, 0.0), np.abs(d))))
    dviol = dviol / scale_d
    row_scale = 1.0 + np.abs(y)
    yviol = np.zeros(lp.n_rows)
    yviol[lp.sense == LE] = np.maximum(y[lp.sense == LE], 0.0)
    yviol[lp.sense == GE] = np.maximum(-y[lp.sense == GE], 0.0)
    yviol = yviol / row_scale
    dual_res, worst_dual = 0.0, ""
    if len(dviol):
        j = int(np.argmax(dviol))
        dual_res, worst_dual = float(dviol[j]), (names_v[j].name if names_v else str(j))
    if len(yviol) and yviol.max() > dual_res:
        i = int(np.argmax(yviol))
        dual_res, worst_dual = float(yviol[i]), f"row:{names_r[i].name if names_r else i}"

    primal_obj = lp.objective(x)
    denom = max(1.0, abs(primal_obj))
    cs_rows = np.abs(y) * np.where(lp.sense == EQ, 0.0, np.abs(slack))
    with np.errstate(invalid="ignore"):
        dist_lo = np.where(np.isfinite(lp.lower), x - lp.lower, np.inf)
        dist_hi = np.where(np.isfinite(lp.upper), lp.upper - x, np.inf)
    dist = np.where(d > 0, dist_lo, dist_hi)
    cs_vars = np.where((d != 0) & np.isfinite(dist), np.abs(d) * np.abs(np.where(np.isfinite(dist), dist, 0.0)), 0.0)
    cs = max(float(cs_rows.max(initial=0.0)), float(cs_vars.max(initial=0.0))) / denom

    bound_term = np.where(
        d > 0,
        np.where(np.isfinite(lp.lower), lp.lower, x),
        np.where(np.isfinite(lp.upper), lp.upper, x),
    )
    dual_obj = float(lp.rhs @ y + d @ bound_term) + lp.offset
    gap = abs(primal_obj - dual_obj) / denom
    return CertificateReport(
        primal_residual=primal_res,
        dual_residual=dual_res,
        complementary_slackness=cs,
        duality_gap=gap,
        primal_objective=primal_obj,
        dual_objective=dual_obj,
        tol=tol,
        worst_row=worst_row,
        worst_dual=worst_dual,
    )
