"""Network bundles, scenario files and snapshot resampling.

A bundle is a directory of comma-separated files with a header row::

    snapshots.csv     timestamp,weight
    buses.csv         id,country[,lat,lon]
    carriers.csv      name,emission_factor[,variable_renewable]
    generators.csv    id,bus,carrier[,existing_capacity,extendable,capacity_min,
                      capacity_max,capital_cost,marginal_cost]
    lines.csv         id,bus_from,bus_to,reactance[,length,existing_capacity,
                      extendable,capacity_max,capital_cost]
    storage.csv       id,bus plus per-component columns (see STORAGE_COLUMNS)
    loads.csv         timestamp,<bus id>...
    availability.csv  timestamp,<generator or line id>...   (optional)
    inflow.csv        timestamp,<storage id>...             (optional)

Empty cells take the column default.  Numbers are parsed with ``float`` so
only a decimal point is accepted.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .core import (
    Bus,
    Carrier,
    Generator,
    Line,
    Network,
    SnapshotSet,
    StorageComponentSpec,
    StorageTech,
    ValidationReport,
    validate_network,
)

STORAGE_MODES = ("fixed_ep", "variable_ep", "h2_hub")


class IngestError(Exception):
    pass


class MissingFile(IngestError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name


class MalformedRow(IngestError):
    def __init__(self, file, line, column, message=""):
        super().__init__(f"{file}:{line}: column {column!r}: {message}")
        self.file, self.line, self.column = file, line, column


class ValidationFailed(IngestError):
    def __init__(self, report: ValidationReport):
        super().__init__(str(report))
        self.report = report


class MalformedKey(IngestError):
    pass


class OutOfRange(IngestError):
    pass


class NotDivisible(ValueError):
    pass


# ---------------------------------------------------------------- scenarios
@dataclass(frozen=True)
class ScenarioConfig:
    storage_mode: str = "fixed_ep"
    co2_cap: float = math.inf
    equity_fraction: float = 0.8
    line_volume_expansion_frac: float = 0.25
    epsilon_cost: Optional[float] = 0.01
    feasibility_tol: float = 1e-7
    optimality_tol: float = 1e-7
    pivot_tol: float = 1e-9
    max_iterations: int = 1_000_000
    refactor_interval: int = 100
    scaling: bool = True
    anti_cycling: bool = True
    min_mpi_mw: float = 1.0
    min_flh: float = 80.0
    threshold_mw: float = 1000.0
    name: str = ""

    def __post_init__(self):
        problems = scenario_problems(self)
        if problems:
            raise OutOfRange("; ".join(problems))

    def solver_options(self, **overrides):
        from .solver import SolverOptions

        opts = dict(
            feasibility_tol=self.feasibility_tol,
            optimality_tol=self.optimality_tol,
            pivot_tol=self.pivot_tol,
            max_iterations=self.max_iterations,
            refactor_interval=self.refactor_interval,
            scaling=self.scaling,
            anti_cycling=self.anti_cycling,
        )
        opts.update(overrides)
        return SolverOptions(**opts)

    def with_options(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


def scenario_problems(cfg: ScenarioConfig) -> list:
    out = []
    if cfg.storage_mode not in STORAGE_MODES:
        out.append(f"storage_mode must be one of {STORAGE_MODES}, got {cfg.storage_mode!r}")
    if not cfg.co2_cap >= 0:
        out.append(f"co2_cap must be >= 0, got {cfg.co2_cap}")
    if not 0 <= cfg.equity_fraction <= 1:
        out.append(f"equity_fraction out of [0,1]: {cfg.equity_fraction}")
    if not cfg.line_volume_expansion_frac >= 0:
        out.append(f"line_volume_expansion_frac must be >= 0, got {cfg.line_volume_expansion_frac}")
    if cfg.epsilon_cost is not None and not cfg.epsilon_cost >= 0:
        out.append(f"epsilon_cost must be >= 0, got {cfg.epsilon_cost}")
    for name in ("feasibility_tol", "optimality_tol", "pivot_tol"):
        if not getattr(cfg, name) > 0:
            out.append(f"{name} must be > 0")
    if cfg.max_iterations < 1 or cfg.refactor_interval < 1:
        out.append("iteration settings must be >= 1")
    if cfg.min_mpi_mw < 0 or cfg.min_flh < 0 or cfg.threshold_mw < 0:
        out.append("report filters must be >= 0")
    return out


_SCENARIO_TYPES = {
    "storage_mode": str,
    "co2_cap": float,
    "equity_fraction": float,
    "line_volume_expansion_frac": float,
    "epsilon_cost": float,
    "feasibility_tol": float,
    "optimality_tol": float,
    "pivot_tol": float,
    "max_iterations": int,
    "refactor_interval": int,
    "scaling": "bool",
    "anti_cycling": "bool",
    "min_mpi_mw": float,
    "min_flh": float,
    "threshold_mw": float,
    "name": str,
}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_scenario_text(text: str, source: str = "<string>") -> ScenarioConfig:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MalformedKey(f"{source}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCENARIO_TYPES:
            raise MalformedKey(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise MalformedKey(f"{source}:{lineno}: duplicate key {key!r}")
        kind = _SCENARIO_TYPES[key]
        try:
            if kind == "bool":
                values[key] = _parse_bool(value)
            elif key == "epsilon_cost" and value.lower() == "none":
                values[key] = None  # use each technology's own epsilon
            elif kind is float:
                values[key] = math.inf if value.lower() == "inf" else float(value)
            elif kind is int:
                values[key] = int(value)
            else:
                values[key] = value
        except ValueError as exc:
            raise MalformedKey(f"{source}:{lineno}: bad value for {key!r}: {value!r}") from exc
    if not values.get("name"):
        values["name"] = Path(source).stem if source != "<string>" else values.get("storage_mode", "")
    return ScenarioConfig(**values)


def parse_scenario(path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    return parse_scenario_text(path.read_text(encoding="utf-8"), str(path))


def format_scenario(cfg: ScenarioConfig) -> str:
    lines = []
    for key in _SCENARIO_TYPES:
        v = getattr(cfg, key)
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif v is None:
            v = "none"
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ bundles
COMPONENT_FIELDS = {
    "charger": ("investment", "fom", "lifetime", "efficiency", "discount_rate"),
    "store": ("investment", "fom", "lifetime", "standing_efficiency", "discount_rate"),
    "discharger": ("investment", "fom", "lifetime", "efficiency", "discount_rate"),
}
STORAGE_COLUMNS = (
    "id", "bus", "carrier", "coupling", "hub_id", "ep_ratio_hours", "shared_converter",
    "extendable", "existing_charger", "existing_store", "existing_discharger",
    "spillage_allowed", "dispatch_epsilon_cost", "energy_level_cost",
) + tuple(f"{k}_{f}" for k, fields in COMPONENT_FIELDS.items() for f in fields)


class _Table:
    """Rows of one CSV file with typed, located accessors."""

    def __init__(self, path: Path):
        self.name = path.name
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise MalformedRow(self.name, 1, "", "empty file") from None
            self.header = [h.strip() for h in header]
            self.rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(self.header):
                    raise MalformedRow(self.name, lineno, "", f"expected {len(self.header)} fields, got {len(row)}")
                self.rows.append((lineno, {h: c.strip() for h, c in zip(self.header, row)}))

    def require(self, *columns):
        for col in columns:
            if col not in self.header:
                raise MalformedRow(self.name, 1, col, "missing column")

    def text(self, lineno, row, col, default=None):
        value = row.get(col, "")
        if value == "":
            if default is None:
                raise MalformedRow(self.name, lineno, col, "empty value")
            return default
        return value

    def number(self, lineno, row, col, default=None):
        value = row.get(col, "")
        if value == "":
            if default is None:
                raise MalformedRow(self.name, lineno, col, "empty value")
            return float(default)
        try:
            return float(value)
        except ValueError:
            raise MalformedRow(self.name, lineno, col, f"not a number: {value!r}") from None

    def flag(self, lineno, row, col, default=False):
        value = row.get(col, "")
        if value == "":
            return default
        try:
            return _parse_bool(value)
        except ValueError:
            raise MalformedRow(self.name, lineno, col, f"not a boolean: {value!r}") from None


def _read_table(directory: Path, name: str, optional=False):
    path = directory / name
    if not path.exists():
        if optional:
            return None
        raise MissingFile(name)
    return _Table(path)


def _read_series(table: _Table, timestamps) -> dict:
    """Column-per-entity series aligned to ``timestamps``."""
    table.require("timestamp")
    if len(table.rows) != len(timestamps):
        raise MalformedRow(table.name, len(table.rows) + 1, "timestamp",
                           f"{len(table.rows)} rows for {len(timestamps)} snapshots")
    out = {col: np.empty(len(timestamps)) for col in table.header if col != "timestamp"}
    for t, (lineno, row) in enumerate(table.rows):
        if row["timestamp"] != timestamps[t]:
            raise MalformedRow(table.name, lineno, "timestamp", f"expected {timestamps[t]!r}, got {row['timestamp']!r}")
        for col in out:
            out[col][t] = table.number(lineno, row, col)
    return out


def read_network_bundle(directory) -> Network:
    """Parse a bundle without validating it."""
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingFile(str(directory))

    snaps = _read_table(directory, "snapshots.csv")
    snaps.require("timestamp", "weight")
    timestamps = [row["timestamp"] for _, row in snaps.rows]
    weights = [snaps.number(ln, row, "weight") for ln, row in snaps.rows]
    snapshots = SnapshotSet(tuple(timestamps), np.array(weights))

    t = _read_table(directory, "buses.csv")
    t.require("id", "country")
    buses = []
    for ln, row in t.rows:
        coords = None
        if row.get("lat", "") != "" and row.get("lon", "") != "":
            coords = (t.number(ln, row, "lat"), t.number(ln, row, "lon"))
        buses.append(Bus(t.text(ln, row, "id"), t.text(ln, row, "country"), coords))

    t = _read_table(directory, "carriers.csv")
    t.require("name", "emission_factor")
    carriers = [
        Carrier(t.text(ln, row, "name"), t.number(ln, row, "emission_factor"), t.flag(ln, row, "variable_renewable"))
        for ln, row in t.rows
    ]

    loads_t = _read_table(directory, "loads.csv")
    loads = _read_series(loads_t, timestamps)
    avail_t = _read_table(directory, "availability.csv", optional=True)
    avail = _read_series(avail_t, timestamps) if avail_t else {}
    inflow_t = _read_table(directory, "inflow.csv", optional=True)
    inflow = _read_series(inflow_t, timestamps) if inflow_t else {}

    t = _read_table(directory, "generators.csv")
    t.require("id", "bus", "carrier")
    generators = []
    for ln, row in t.rows:
        gid = t.text(ln, row, "id")
        generators.append(Generator(
            id=gid,
            bus=t.text(ln, row, "bus"),
            carrier=t.text(ln, row, "carrier"),
            existing_capacity=t.number(ln, row, "existing_capacity", 0.0),
            extendable=t.flag(ln, row, "extendable"),
            capacity_min=t.number(ln, row, "capacity_min", 0.0),
            capacity_max=t.number(ln, row, "capacity_max", math.inf),
            capital_cost=t.number(ln, row, "capital_cost", 0.0),
            marginal_cost=t.number(ln, row, "marginal_cost", 0.0),
            availability=avail.get(gid),
        ))

    t = _read_table(directory, "lines.csv")
    t.require("id", "bus_from", "bus_to", "reactance")
    lines = []
    for ln, row in t.rows:
        lid = t.text(ln, row, "id")
        lines.append(Line(
            id=lid,
            bus_from=t.text(ln, row, "bus_from"),
            bus_to=t.text(ln, row, "bus_to"),
            reactance=t.number(ln, row, "reactance"),
            length=t.number(ln, row, "length", 1.0),
            existing_capacity=t.number(ln, row, "existing_capacity", 0.0),
            extendable=t.flag(ln, row, "extendable"),
            capacity_max=t.number(ln, row, "capacity_max", math.inf),
            capital_cost=t.number(ln, row, "capital_cost", 0.0),
            availability=avail.get(lid),
        ))

    t = _read_table(directory, "storage.csv")
    t.require("id", "bus", "charger_investment", "store_investment", "discharger_investment")
    storage = []
    for ln, row in t.rows:
        sid = t.text(ln, row, "id")
        specs = {}
        for kind in COMPONENT_FIELDS:
            specs[kind] = StorageComponentSpec(
                kind=kind,
                investment=t.number(ln, row, f"{kind}_investment"),
                fom_frac=t.number(ln, row, f"{kind}_fom", 0.0),
                lifetime=t.number(ln, row, f"{kind}_lifetime", 20.0),
                efficiency=t.number(ln, row, f"{kind}_efficiency", 1.0) if kind != "store" else 1.0,
                discount_rate=t.number(ln, row, f"{kind}_discount_rate", 0.07),
                standing_efficiency=t.number(ln, row, "store_standing_efficiency", 1.0) if kind == "store" else 1.0,
            )
        ep = row.get("ep_ratio_hours", "")
        hub = row.get("hub_id", "")
        storage.append(StorageTech(
            id=sid,
            bus=t.text(ln, row, "bus"),
            charger=specs["charger"],
            store=specs["store"],
            discharger=specs["discharger"],
            ep_ratio_hours=t.number(ln, row, "ep_ratio_hours") if ep != "" else None,
            coupling=t.text(ln, row, "coupling", "free"),
            hub_id=hub or None,
            shared_converter=t.flag(ln, row, "shared_converter"),
            extendable=t.flag(ln, row, "extendable", True),
            existing_charger=t.number(ln, row, "existing_charger", 0.0),
            existing_store=t.number(ln, row, "existing_store", 0.0),
            existing_discharger=t.number(ln, row, "existing_discharger", 0.0),
            inflow=inflow.get(sid),
            spillage_allowed=t.flag(ln, row, "spillage_allowed"),
            dispatch_epsilon_cost=t.number(ln, row, "dispatch_epsilon_cost", 0.01),
            energy_level_cost=t.number(ln, row, "energy_level_cost", 0.0),
            carrier=t.text(ln, row, "carrier", "storage"),
        ))

    known = {g.id for g in generators} | {ln_.id for ln_ in lines}
    for col in avail:
        if col not in known:
            raise MalformedRow("availability.csv", 1, col, "unknown generator or line")
    for col in inflow:
        if col not in {s.id for s in storage}:
            raise MalformedRow("inflow.csv", 1, col, "unknown storage")

    return Network(
        buses=buses, lines=lines, generators=generators, storage=storage, carriers=carriers,
        snapshots=snapshots, loads=loads, name=directory.name,
    )


def parse_network_bundle(directory) -> Network:
    """Parse and validate a bundle; raises :class:`ValidationFailed` on violations."""
    network = read_network_bundle(directory)
    report = validate_network(network)
    if not report.ok:
        raise ValidationFailed(report)
    return network


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _write_csv(path: Path, header, rows):
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    os.replace(tmp, path)


def write_network_bundle(network: Network, directory) -> Path:
    """Inverse of :func:`read_network_bundle`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ts = network.snapshots.timestamps
    n = len(ts)
    _write_csv(directory / "snapshots.csv", ["timestamp", "weight"],
               zip(ts, (float(w) for w in network.snapshots.weights)))
    _write_csv(directory / "buses.csv", ["id", "country", "lat", "lon"],
               ((b.id, b.country, *(b.coordinates or (None, None))) for b in network.buses))
    _write_csv(directory / "carriers.csv", ["name", "emission_factor", "variable_renewable"],
               ((c.name, float(c.emission_factor), c.variable_renewable) for c in network.carriers))
    _write_csv(directory / "generators.csv",
               ["id", "bus", "carrier", "existing_capacity", "extendable", "capacity_min", "capacity_max",
                "capital_cost", "marginal_cost"],
               ((g.id, g.bus, g.carrier, float(g.existing_capacity), g.extendable, float(g.capacity_min),
                 float(g.capacity_max), float(g.capital_cost), float(g.marginal_cost)) for g in network.generators))
    _write_csv(directory / "lines.csv",
               ["id", "bus_from", "bus_to", "reactance", "length", "existing_capacity", "extendable",
                "capacity_max", "capital_cost"],
               ((ln.id, ln.bus_from, ln.bus_to, float(ln.reactance), float(ln.length), float(ln.existing_capacity),
                 ln.extendable, float(ln.capacity_max), float(ln.capital_cost)) for ln in network.lines))
    rows = []
    for s in network.storage:
        r = [s.id, s.bus, s.carrier, s.coupling, s.hub_id,
             None if s.ep_ratio_hours is None else float(s.ep_ratio_hours), s.shared_converter, s.extendable,
             float(s.existing_charger), float(s.existing_store), float(s.existing_discharger), s.spillage_allowed,
             float(s.dispatch_epsilon_cost), float(s.energy_level_cost)]
        for kind, fields in COMPONENT_FIELDS.items():
            spec = s.component(kind)
            attr = {"fom": "fom_frac"}
            r.extend(float(getattr(spec, attr.get(f, f))) for f in fields)
        rows.append(r)
    _write_csv(directory / "storage.csv", STORAGE_COLUMNS, rows)

    load_ids = [b.id for b in network.buses if b.id in network.loads]
    _write_csv(directory / "loads.csv", ["timestamp", *load_ids],
               ([ts[t], *(float(network.loads[b][t]) for b in load_ids)] for t in range(n)))
    series = [(g.id, g.availability) for g in network.generators if g.availability is not None]
    series += [(ln.id, ln.availability) for ln in network.lines if ln.availability is not None]
    avail_path = directory / "availability.csv"
    if series:
        _write_csv(avail_path, ["timestamp", *(k for k, _ in series)],
                   ([ts[t], *(float(v[t]) for _, v in series)] for t in range(n)))
    elif avail_path.exists():
        avail_path.unlink()
    inflows = [(s.id, s.inflow) for s in network.storage if s.inflow is not None]
    inflow_path = directory / "inflow.csv"
    if inflows:
        _write_csv(inflow_path, ["timestamp", *(k for k, _ in inflows)],
                   ([ts[t], *(float(v[t]) for _, v in inflows)] for t in range(n)))
    elif inflow_path.exists():
        inflow_path.unlink()
    return directory


def networks_equal(a: Network, b: Network) -> bool:
    """Structural equality including time series (exact)."""

    def same(x, y):
        if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
            return x is not None and y is not None and np.array_equal(x, y)
        if hasattr(x, "__dataclass_fields__") and type(x) is type(y):
            return all(same(getattr(x, f), getattr(y, f)) for f in x.__dataclass_fields__ if f != "name")
        if isinstance(x, (tuple, list)) and isinstance(y, (tuple, list)):
            return len(x) == len(y) and all(same(p, q) for p, q in zip(x, y))
        if isinstance(x, dict) and isinstance(y, dict):
            return x.keys() == y.keys() and all(same(x[k], y[k]) for k in x)
        return x == y

    return same(a, b)


# --------------------------------------------------------------- resampling
def resample_snapshots(network: Network, step: int) -> Network:
    """Aggregate consecutive groups of ``step`` snapshots into one.

    Each kept snapshot carries the label of the first member and the summed
    weight of its group; demand, availability and inflow become group means.
    For equal weights within a group this preserves weighted energy exactly.
    """
    if int(step) != step or step < 1:
        raise ValueError(f"step must be a positive integer, got {step}")
    step = int(step)
    n = len(network.snapshots)
    if n % step:
        raise NotDivisible(f"step {step} does not divide {n} snapshots")
    if step == 1:
        return network
    w = network.snapshots.weights.reshape(-1, step)
    new_w = w.sum(axis=1)

    def wmean(series):
        # weight-averaged so that sum_t w_t * d_t is preserved even for unequal weights
        if series is None:
            return None
        s = np.asarray(series, dtype=float).reshape(-1, step)
        return (s * w).sum(axis=1) / new_w

    snapshots = SnapshotSet(network.snapshots.timestamps[::step], new_w)
    return replace(
        network,
        snapshots=snapshots,
        loads={k: wmean(v) for k, v in network.loads.items()},
        generators=tuple(replace(g, availability=wmean(g.availability)) for g in network.generators),
        lines=tuple(replace(ln, availability=wmean(ln.availability)) for ln in network.lines),
        storage=tuple(replace(s, inflow=wmean(s.inflow)) for s in network.storage),
    )
