"""Free-format MPS export and import of :class:`LinearProgram`.

Row and column names come from the registries (``balance[b1][0]``,
``g[wind_b1][0]``); the objective offset is stored as the negated RHS of the
objective row, the convention shared by common LP solvers.
"""
from __future__ import annotations

import math
import os
import re
from pathlib import Path

import numpy as np

from .lp import EQ, GE, LE, LinearProgram, Registry

OBJ = "COST"
_SENSE_CODE = {LE: "L", EQ: "E", GE: "G"}
_CODE_SENSE = {v: k for k, v in _SENSE_CODE.items()}


class MpsError(ValueError):
    pass


def _names(registry: Registry, prefix: str, n: int) -> list:
    if len(registry) == n:
        return [e.name for e in registry.entries]
    return [f"{prefix}{i}" for i in range(n)]


def _num(v: float) -> str:
    return repr(float(v))


def format_mps(lp: LinearProgram, name: str = "STORAGEVALUE") -> str:
    lp.check()
    rnames = _names(lp.constraints, "R", lp.n_rows)
    cnames = _names(lp.variables, "C", lp.n_vars)
    out = [f"NAME {name}", "ROWS", f" N {OBJ}"]
    out += [f" {_SENSE_CODE[s]} {rn}" for s, rn in zip(lp.sense, rnames)]
    out.append("COLUMNS")
    A = lp.A.tocsc()
    for j in range(lp.n_vars):
        if lp.c[j] != 0:
            out.append(f" {cnames[j]} {OBJ} {_num(lp.c[j])}")
        for p in range(A.indptr[j], A.indptr[j + 1]):
            out.append(f" {cnames[j]} {rnames[A.indices[p]]} {_num(A.data[p])}")
        if lp.c[j] == 0 and A.indptr[j] == A.indptr[j + 1]:
            out.append(f" {cnames[j]} {OBJ} 0.0")
    out.append("RHS")
    if lp.offset != 0:
        out.append(f" RHS {OBJ} {_num(-lp.offset)}")
    for i in np.flatnonzero(lp.rhs):
        out.append(f" RHS {rnames[i]} {_num(lp.rhs[i])}")
    out.append("BOUNDS")
    for j in range(lp.n_vars):
        lo, hi, cn = lp.lower[j], lp.upper[j], cnames[j]
        if lo == hi:
            out.append(f" FX BND {cn} {_num(lo)}")
            continue
        if math.isinf(lo) and math.isinf(hi):
            out.append(f" FR BND {cn}")
            continue
        if math.isinf(lo):
            out.append(f" MI BND {cn}")
        elif lo != 0:
            out.append(f" LO BND {cn} {_num(lo)}")
        if not math.isinf(hi):
            out.append(f" UP BND {cn} {_num(hi)}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def write_mps(lp: LinearProgram, path, name: str = "STORAGEVALUE") -> Path:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(format_mps(lp, name), encoding="utf-8")
    os.replace(tmp, path)
    return path


_NAME = re.compile(r"^([^\[\]]+)\[(.*)\]\[(\d+)\]$|^([^\[\]]+)\[(.*)\]$")


def _registry(names) -> Registry:
    """Rebuild ``kind[entity][snapshot]`` entries; other names become a bare kind."""
    reg = Registry()
    for name in names:
        m = _NAME.match(name)
        if m is None:
            reg.add(name, "")
        elif m.group(1) is not None:
            reg.add(m.group(1), m.group(2), int(m.group(3)))
        else:
            reg.add(m.group(4), m.group(5))
    return reg


def parse_mps(text: str) -> LinearProgram:
    """Read free-format MPS (N/L/E/G rows; LO/UP/FX/FR/MI/PL bounds)."""
    section = None
    obj_row = None
    row_index: dict = {}
    sense: list = []
    col_index: dict = {}
    c: list = []
    trip_r, trip_c, trip_v = [], [], []
    rhs: list = []
    offset = 0.0
    lower: list = []
    upper: list = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw[0].isspace():
            section = raw.split()[0].upper()
            if section == "ENDATA":
                break
            continue
        tok = raw.split()
        try:
            if section == "ROWS":
                code, rn = tok[0].upper(), tok[1]
                if code == "N":
                    if obj_row is None:
                        obj_row = rn
                    continue
                row_index[rn] = len(sense)
                sense.append(_CODE_SENSE[code])
                rhs.append(0.0)
            elif section == "COLUMNS":
                cn = tok[0]
                if cn not in col_index:
                    col_index[cn] = len(c)
                    c.append(0.0)
                    lower.append(0.0)
                    upper.append(math.inf)
                j = col_index[cn]
                for rn, val in zip(tok[1::2], tok[2::2]):
                    v = float(val)
                    if rn == obj_row:
                        c[j] += v
                    else:
                        trip_r.append(row_index[rn])
                        trip_c.append(j)
                        trip_v.append(v)
            elif section == "RHS":
                body = tok[1:] if len(tok) % 2 == 1 else tok
                for rn, val in zip(body[0::2], body[1::2]):
                    if rn == obj_row:
                        offset = -float(val)
                    else:
                        rhs[row_index[rn]] = float(val)
            elif section == "BOUNDS":
                code, cn = tok[0].upper(), tok[2]
                j = col_index[cn]
                val = float(tok[3]) if len(tok) > 3 else None
                if code == "LO":
                    lower[j] = val
                elif code == "UP":
                    upper[j] = val
                elif code == "FX":
                    lower[j] = upper[j] = val
                elif code == "FR":
                    lower[j], upper[j] = -math.inf, math.inf
                elif code == "MI":
                    lower[j] = -math.inf
                elif code == "PL":
                    upper[j] = math.inf
                else:
                    raise MpsError(f"line {lineno}: unsupported bound type {code}")
            elif section in ("NAME", "OBJSENSE"):
                continue
            else:
                raise MpsError(f"line {lineno}: data outside a known section")
        except (KeyError, IndexError, ValueError) as exc:
            if isinstance(exc, MpsError):
                raise
            raise MpsError(f"line {lineno}: cannot parse {raw.strip()!r}") from exc
    lp = LinearProgram(
        c=np.array(c, dtype=float),
        rows=np.array(trip_r, dtype=np.int64),
        cols=np.array(trip_c, dtype=np.int64),
        vals=np.array(trip_v, dtype=float),
        sense=np.array(sense, dtype="<U1"),
        rhs=np.array(rhs, dtype=float),
        lower=np.array(lower, dtype=float),
        upper=np.array(upper, dtype=float),
        variables=_registry(col_index),
        constraints=_registry(row_index),
        offset=offset,
    )
    lp.check()
    return lp


def read_mps(path) -> LinearProgram:
    return parse_mps(Path(path).read_text(encoding="utf-8"))
