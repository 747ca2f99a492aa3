"""Sparse linear program container with named variables and rows."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

LE, EQ, GE = "L", "E", "G"
SENSES = (LE, EQ, GE)


class InfeasibleBounds(ValueError):
    pass


@dataclass(frozen=True)
class RegistryEntry:
    kind: str
    entity: str
    snapshot: int = -1  # -1 for time-independent entries

    @property
    def name(self) -> str:
        base = f"{self.kind}[{self.entity}]"
        return base if self.snapshot < 0 else f"{base}[{self.snapshot}]"


class Registry:
    """Bidirectional map between indices and ``(kind, entity, snapshot)``."""

    def __init__(self):
        self.entries: list = []
        self._index: dict = {}
        self._by_kind: dict = {}

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, kind: str, entity: str, snapshot: int = -1) -> int:
        key = (kind, entity, snapshot)
        if key in self._index:
            raise KeyError(f"duplicate registry entry {key}")
        idx = len(self.entries)
        self.entries.append(RegistryEntry(kind, entity, snapshot))
        self._index[key] = idx
        self._by_kind.setdefault(kind, []).append(idx)
        return idx

    def index(self, kind: str, entity: str, snapshot: int = -1) -> int:
        return self._index[(kind, entity, snapshot)]

    def get(self, kind: str, entity: str, snapshot: int = -1, default=None):
        return self._index.get((kind, entity, snapshot), default)

    def series(self, kind: str, entity: str, n_snapshots: int) -> np.ndarray:
        return np.array([self._index[(kind, entity, t)] for t in range(n_snapshots)], dtype=np.int64)

    def __contains__(self, key) -> bool:
        return tuple(key) in self._index

    def kinds(self) -> list:
        return list(self._by_kind)

    def of_kind(self, kind: str) -> list:
        return list(self._by_kind.get(kind, []))

    def names(self) -> list:
        return [e.name for e in self.entries]


@dataclass
class LinearProgram:
    """``min c.x + offset`` subject to ``A x (sense) b`` and ``lower <= x <= upper``.

    Columns and rows are described by :class:`Registry` objects.  Build with
    :class:`LPBuilder`; :meth:`LPBuilder.finish` sorts the triplets and merges
    duplicates so identical inputs give identical arrays.
    """

    c: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    sense: np.ndarray
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    variables: Registry = field(default_factory=Registry)
    constraints: Registry = field(default_factory=Registry)
    offset: float = 0.0

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    @property
    def A(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.vals, (self.rows, self.cols)), shape=(self.n_rows, self.n_vars))

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ x) + self.offset

    def check(self) -> None:
        """Raise ``ValueError`` on a structurally malformed program."""
        n, m = self.n_vars, self.n_rows
        for name, arr, size in (("lower", self.lower, n), ("upper", self.upper, n), ("sense", self.sense, m)):
            if len(arr) != size:
                raise ValueError(f"{name} has length {len(arr)}, expected {size}")
        if not (len(self.rows) == len(self.cols) == len(self.vals)):
            raise ValueError("triplet arrays differ in length")
        if len(self.rows) and (self.rows.min() < 0 or self.rows.max() >= m):
            raise ValueError("row index out of range")
        if len(self.cols) and (self.cols.min() < 0 or self.cols.max() >= n):
            raise ValueError("column index out of range")
        if not np.all(np.isfinite(self.c)) or not np.all(np.isfinite(self.rhs)) or not np.all(np.isfinite(self.vals)):
            raise ValueError("non-finite cost, rhs or coefficient")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValueError("NaN bound")
        if np.any(self.lower > self.upper):
            j = int(np.argmax(self.lower > self.upper))
            raise InfeasibleBounds(f"lower > upper for variable {self.variables.entries[j].name if self.variables.entries else j}")
        if not set(np.unique(self.sense)).issubset(SENSES):
            raise ValueError("unknown row sense")

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x

    def row_violation(self, x: np.ndarray) -> np.ndarray:
        """Non-negative violation of every row at ``x``."""
        act = self.row_activity(x)
        viol = np.zeros(self.n_rows)
        le, ge, eq = self.sense == LE, self.sense == GE, self.sense == EQ
        viol[le] = np.maximum(act[le] - self.rhs[le], 0.0)
        viol[ge] = np.maximum(self.rhs[ge] - act[ge], 0.0)
        viol[eq] = np.abs(act[eq] - self.rhs[eq])
        return viol


class LPBuilder:
    """Incremental assembly of a :class:`LinearProgram`."""

    def __init__(self):
        self.variables = Registry()
        self.constraints = Registry()
        self._c: list = []
        self._lo: list = []
        self._hi: list = []
        self._rows: list = []
        self._cols: list = []
        self._vals: list = []
        self._sense: list = []
        self._rhs: list = []
        self.offset = 0.0

    def add_variable(self, kind, entity, snapshot=-1, lower=0.0, upper=np.inf, cost=0.0) -> int:
        if lower > upper:
            raise InfeasibleBounds(f"{kind}[{entity}]: lower {lower} > upper {upper}")
        idx = self.variables.add(kind, entity, snapshot)
        self._c.append(float(cost))
        self._lo.append(float(lower))
        self._hi.append(float(upper))
        return idx

    def add_series(self, kind, entity, n_snapshots, lower=0.0, upper=np.inf, cost=0.0) -> np.ndarray:
        lower = np.broadcast_to(np.asarray(lower, dtype=float), (n_snapshots,))
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (n_snapshots,))
        cost = np.broadcast_to(np.asarray(cost, dtype=float), (n_snapshots,))
        return np.array(
            [self.add_variable(kind, entity, t, lower[t], upper[t], cost[t]) for t in range(n_snapshots)],
            dtype=np.int64,
        )

    def add_cost(self, var: int, cost: float) -> None:
        self._c[var] += float(cost)

    def add_row(self, kind, entity, snapshot, coeffs, sense, rhs) -> int:
        """``coeffs`` is an iterable of ``(variable index, coefficient)``."""
        if sense not in SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        idx = self.constraints.add(kind, entity, snapshot)
        for j, a in coeffs:
            self._rows.append(idx)
            self._cols.append(int(j))
            self._vals.append(float(a))
        self._sense.append(sense)
        self._rhs.append(float(rhs))
        return idx

    def finish(self) -> LinearProgram:
        n, m = len(self._c), len(self._rhs)
        A = sp.coo_matrix(
            (np.array(self._vals, dtype=float), (np.array(self._rows, dtype=np.int64), np.array(self._cols, dtype=np.int64))),
            shape=(m, n),
        ).tocsr()
        A.sum_duplicates()
        A.eliminate_zeros()
        A.sort_indices()
        coo = A.tocoo()
        lp = LinearProgram(
            c=np.array(self._c, dtype=float),
            rows=coo.row.astype(np.int64),
            cols=coo.col.astype(np.int64),
            vals=coo.data.astype(float),
            sense=np.array(self._sense, dtype="<U1"),
            rhs=np.array(self._rhs, dtype=float),
            lower=np.array(self._lo, dtype=float),
            upper=np.array(self._hi, dtype=float),
            variables=self.variables,
            constraints=self.constraints,
            offset=self.offset,
        )
        return lp


def from_arrays(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, A_ge=None, b_ge=None, lower=None, upper=None, offset=0.0):
    """Build an anonymous program from dense arrays (tests, random LPs)."""
    c = np.asarray(c, dtype=float)
    n = len(c)
    b = LPBuilder()
    lower = np.zeros(n) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    for j in range(n):
        b.add_variable("x", str(j), -1, lower[j], upper[j], c[j])
    for sense, mat, rhs in ((LE, A_ub, b_ub), (EQ, A_eq, b_eq), (GE, A_ge, b_ge)):
        if mat is None:
            continue
        mat = np.atleast_2d(np.asarray(mat, dtype=float))
        for i, row in enumerate(mat):
            b.add_row(sense, str(len(b.constraints)), -1, [(j, a) for j, a in enumerate(row) if a != 0], sense, rhs[i])
    b.offset = offset
    return b.finish()
