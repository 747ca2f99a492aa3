"""Solution tables extracted from an optimal run, and their on-disk form.

A run directory holds ``capacities.csv``, ``dispatch.csv``, ``prices.csv``,
``flows.csv``, ``storage.csv`` and ``summary.json``.  Analysis works on
:class:`ModelResults` alone, so stored runs never need re-solving.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Network, annualized_cost
from .formulation import KW_PER_MW, HOURS_PER_YEAR, build_problem, store_groups
from .ingest import MissingFile, MalformedRow, ScenarioConfig
from .lp import LinearProgram
from .solver import Solution, SolverOptions, solve

RESULT_FILES = ("capacities.csv", "dispatch.csv", "prices.csv", "flows.csv", "storage.csv", "summary.json")
CAPACITY_COLUMNS = ("component_type", "id", "component", "bus", "carrier", "group", "renewable",
                    "existing", "optimal", "annual_cost")
DISPATCH_COLUMNS = ("timestamp", "weight", "generator", "dispatch", "available")
PRICE_COLUMNS = ("timestamp", "bus", "price", "demand", "degenerate")
FLOW_COLUMNS = ("timestamp", "line", "flow", "capacity")
STORAGE_COLUMNS = ("timestamp", "storage", "group", "charge", "discharge", "level", "spill")
SUMMARY_VERSION = 1


class NotOptimal(RuntimeError):
    """Raised when tables are requested from a non-optimal solve."""


@dataclass(frozen=True)
class CapacityRow:
    """Installed capacity of one generator, line or storage component.

    ``annual_cost`` is EUR per MW (MWh for stores) per full year; ``group``
    names the energy store a storage component belongs to (the hub id for
    shared stores).
    """

    component_type: str  # generator | line | storage
    id: str
    component: str  # "" or charger | store | discharger
    bus: str
    carrier: str
    group: str
    renewable: bool
    existing: float
    optimal: float
    annual_cost: float

    @property
    def expansion(self) -> float:
        return self.optimal - self.existing


@dataclass(frozen=True)
class ModelResults:
    network: str
    scenario: str
    storage_mode: str
    status: str
    objective: float
    timestamps: tuple
    weights: np.ndarray
    capacities: tuple
    dispatch: dict
    available: dict
    flows: dict
    line_capacity: dict
    charge: dict
    discharge: dict
    level: dict
    spill: dict
    storage_group: dict  # tech id -> group id
    prices: dict
    demand: dict
    degenerate: dict
    co2_price: float = 0.0
    co2_emissions: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def hours(self) -> float:
        return float(np.sum(self.weights))

    @property
    def years(self) -> float:
        return self.hours / HOURS_PER_YEAR

    def capacity(self, component_type: str, entity: str, component: str = "") -> CapacityRow:
        for row in self.capacities:
            if row.component_type == component_type and row.id == entity and row.component == component:
                return row
        raise KeyError((component_type, entity, component))

    def storage_rows(self, component: str | None = None) -> list:
        return [r for r in self.capacities
                if r.component_type == "storage" and (component is None or r.component == component)]

    def storage_techs(self) -> list:
        return list(self.charge)

    def tech_bus(self, tech: str) -> str:
        return self.capacity("storage", tech, "discharger").bus


# ----------------------------------------------------------------- extract
def _values(x: np.ndarray, idx) -> np.ndarray:
    return np.asarray(x[np.asarray(idx, dtype=np.int64)], dtype=float)


def extract_results(network: Network, scenario: ScenarioConfig, lp: LinearProgram, solution: Solution,
                    tol: float = 1e-6) -> ModelResults:
    """Turn an optimal solution of ``build_problem(network, scenario)`` into tables."""
    if not solution.optimal:
        raise NotOptimal(f"solution status is {solution.status!r}")
    x = np.asarray(solution.primal)
    y = np.asarray(solution.dual)
    V, R = lp.variables, lp.constraints
    T = len(network.snapshots)
    w = np.asarray(network.snapshots.weights, dtype=float)
    carriers = network.carrier_map()

    caps = []
    dispatch, available = {}, {}
    for gen in network.generators:
        G = float(x[V.index("G", gen.id)])
        caps.append(CapacityRow("generator", gen.id, "", gen.bus, gen.carrier, "",
                                carriers[gen.carrier].variable_renewable, gen.existing_capacity, G,
                                gen.capital_cost))
        dispatch[gen.id] = _values(x, V.series("g", gen.id, T))
        available[gen.id] = network.generator_availability(gen) * G

    flows, line_cap = {}, {}
    for ln in network.lines:
        F = float(x[V.index("F", ln.id)])
        caps.append(CapacityRow("line", ln.id, "", ln.bus_from, "AC", "", False, ln.existing_capacity, F,
                                ln.capital_cost))
        flows[ln.id] = _values(x, V.series("f", ln.id, T))
        line_cap[ln.id] = network.line_availability(ln) * F

    charge, discharge, level, spill, group_of = {}, {}, {}, {}, {}
    for grp in store_groups(network, scenario.storage_mode):
        existing_store = sum(s.existing_store for s in grp.members)
        caps.append(CapacityRow("storage", grp.id, "store", grp.bus, grp.owner.carrier, grp.id, False,
                                existing_store, float(x[V.index("H_store", grp.id)]),
                                annualized_cost(grp.owner.store) * KW_PER_MW))
        level[grp.id] = _values(x, V.series("e", grp.id, T))
        spill[grp.id] = _values(x, V.series("spill", grp.id, T)) if ("spill", grp.id, 0) in V else np.zeros(T)
        for s in grp.members:
            group_of[s.id] = grp.id
            for kind in ("charger", "discharger"):
                caps.append(CapacityRow("storage", s.id, kind, s.bus, s.carrier, grp.id, False, s.existing(kind),
                                        float(x[V.index(f"H_{kind}", s.id)]),
                                        annualized_cost(s.component(kind)) * KW_PER_MW))
            charge[s.id] = _values(x, V.series("h_charge", s.id, T))
            discharge[s.id] = _values(x, V.series("h_discharge", s.id, T))

    prices = extract_nodal_prices(network, lp, solution)
    demand = {b.id: np.asarray(network.load(b.id), dtype=float) for b in network.buses}
    installed = {}
    for row in caps:
        if row.component_type in ("generator", "storage") and row.component != "store":
            installed[row.bus] = installed.get(row.bus, 0.0) + max(row.optimal, 0.0)
    degenerate = {b.id: bool(np.all(demand[b.id] == 0) and installed.get(b.id, 0.0) <= tol) for b in network.buses}

    co2_price = 0.0
    emissions = 0.0
    for gen in network.generators:
        emissions += carriers[gen.carrier].emission_factor * float(w @ dispatch[gen.id])
    row = R.get("co2", "total")
    if row is not None:
        co2_price = -float(y[row])  # <= row: dual is non-positive

    return ModelResults(
        network=network.name,
        scenario=scenario.name,
        storage_mode=scenario.storage_mode,
        status=solution.status,
        objective=float(solution.objective),
        timestamps=tuple(network.snapshots.timestamps),
        weights=w.copy(),
        capacities=tuple(caps),
        dispatch=dispatch,
        available=available,
        flows=flows,
        line_capacity=line_cap,
        charge=charge,
        discharge=discharge,
        level=level,
        spill=spill,
        storage_group=group_of,
        prices=prices,
        demand=demand,
        degenerate=degenerate,
        co2_price=co2_price,
        co2_emissions=emissions,
        info={"iterations": int(solution.iterations)},
    )


def extract_nodal_prices(network: Network, lp: LinearProgram, solution: Solution) -> dict:
    """Bus balance duals divided by snapshot weights, EUR/MWh.

    A positive price means one more MW of demand raises the objective.
    """
    if not solution.optimal:
        raise NotOptimal(f"solution status is {solution.status!r}")
    T = len(network.snapshots)
    w = np.asarray(network.snapshots.weights, dtype=float)
    y = np.asarray(solution.dual)
    return {b.id: y[lp.constraints.series("balance", b.id, T)] / w for b in network.buses}


def optimize(network: Network, scenario: ScenarioConfig, opts: SolverOptions | None = None):
    """Build, solve and extract; returns ``(results_or_None, lp, solution)``."""
    lp = build_problem(network, scenario)
    solution = solve(lp, opts or scenario.solver_options())
    results = extract_results(network, scenario, lp, solution) if solution.optimal else None
    return results, lp, solution


# ------------------------------------------------------------- persistence
def _num(v: float) -> str:
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(r))
    return "\n".join(lines) + "\n"


def summary_dict(res: ModelResults) -> dict:
    return {
        "version": SUMMARY_VERSION,
        "network": res.network,
        "scenario": res.scenario,
        "storage_mode": res.storage_mode,
        "status": res.status,
        "objective": res.objective,
        "hours": res.hours,
        "years": res.years,
        "co2_price": res.co2_price,
        "co2_emissions": res.co2_emissions,
        "iterations": res.info.get("iterations", 0),
    }


def write_results(res: ModelResults, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ts, w = res.timestamps, res.weights
    T = len(ts)
    b = lambda flag: "true" if flag else "false"  # noqa: E731

    _atomic_write(directory / "capacities.csv", _csv_text(CAPACITY_COLUMNS, (
        [r.component_type, r.id, r.component, r.bus, r.carrier, r.group, b(r.renewable),
         _num(r.existing), _num(r.optimal), _num(r.annual_cost)] for r in res.capacities)))
    _atomic_write(directory / "dispatch.csv", _csv_text(DISPATCH_COLUMNS, (
        [ts[t], _num(w[t]), g, _num(res.dispatch[g][t]), _num(res.available[g][t])]
        for t in range(T) for g in res.dispatch)))
    _atomic_write(directory / "prices.csv", _csv_text(PRICE_COLUMNS, (
        [ts[t], bus, _num(res.prices[bus][t]), _num(res.demand[bus][t]), b(res.degenerate[bus])]
        for t in range(T) for bus in res.prices)))
    _atomic_write(directory / "flows.csv", _csv_text(FLOW_COLUMNS, (
        [ts[t], ln, _num(res.flows[ln][t]), _num(res.line_capacity[ln][t])] for t in range(T) for ln in res.flows)))
    _atomic_write(directory / "storage.csv", _csv_text(STORAGE_COLUMNS, (
        [ts[t], s, res.storage_group[s], _num(res.charge[s][t]), _num(res.discharge[s][t]),
         _num(res.level[res.storage_group[s]][t]), _num(res.spill[res.storage_group[s]][t])]
        for t in range(T) for s in res.charge)))
    _atomic_write(directory / "summary.json", json.dumps(summary_dict(res), indent=2, sort_keys=True) + "\n")
    return directory


def _read_csv(directory: Path, name: str, columns) -> list:
    path = directory / name
    if not path.exists():
        raise MissingFile(str(path))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != tuple(columns):
            raise MalformedRow(name, 1, "header", f"expected {','.join(columns)}")
        return list(reader)


def _long_to_series(rows, key: str, value: str, timestamps) -> dict:
    pos = {t: i for i, t in enumerate(timestamps)}
    out: dict = {}
    for r in rows:
        arr = out.setdefault(r[key], np.zeros(len(timestamps)))
        arr[pos[r["timestamp"]]] = float(r[value])
    return out


def read_results(directory) -> ModelResults:
    """Inverse of :func:`write_results`."""
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingFile(str(directory))
    spath = directory / "summary.json"
    if not spath.exists():
        raise MissingFile(str(spath))
    summary = json.loads(spath.read_text(encoding="utf-8"))
    price_rows = _read_csv(directory, "prices.csv", PRICE_COLUMNS)
    dispatch_rows = _read_csv(directory, "dispatch.csv", DISPATCH_COLUMNS)
    timestamps, weights = [], []
    seen = set()
    for r in dispatch_rows or price_rows:
        if r["timestamp"] not in seen:
            seen.add(r["timestamp"])
            timestamps.append(r["timestamp"])
            weights.append(float(r.get("weight", 1.0)))
    if not dispatch_rows:
        weights = [summary["hours"] / max(len(timestamps), 1)] * len(timestamps)
    caps = tuple(
        CapacityRow(r["component_type"], r["id"], r["component"], r["bus"], r["carrier"], r["group"],
                    r["renewable"] == "true", float(r["existing"]), float(r["optimal"]), float(r["annual_cost"]))
        for r in _read_csv(directory, "capacities.csv", CAPACITY_COLUMNS)
    )
    flow_rows = _read_csv(directory, "flows.csv", FLOW_COLUMNS)
    storage_rows = _read_csv(directory, "storage.csv", STORAGE_COLUMNS)
    group_of = {}
    for r in storage_rows:
        group_of.setdefault(r["storage"], r["group"])
    level_rows = [dict(r, grp=r["group"]) for r in storage_rows]
    return ModelResults(
        network=summary["network"],
        scenario=summary["scenario"],
        storage_mode=summary["storage_mode"],
        status=summary["status"],
        objective=float(summary["objective"]),
        timestamps=tuple(timestamps),
        weights=np.array(weights, dtype=float),
        capacities=caps,
        dispatch=_long_to_series(dispatch_rows, "generator", "dispatch", timestamps),
        available=_long_to_series(dispatch_rows, "generator", "available", timestamps),
        flows=_long_to_series(flow_rows, "line", "flow", timestamps),
        line_capacity=_long_to_series(flow_rows, "line", "capacity", timestamps),
        charge=_long_to_series(storage_rows, "storage", "charge", timestamps),
        discharge=_long_to_series(storage_rows, "storage", "discharge", timestamps),
        level=_long_to_series(level_rows, "grp", "level", timestamps),
        spill=_long_to_series(level_rows, "grp", "spill", timestamps),
        storage_group=group_of,
        prices=_long_to_series(price_rows, "bus", "price", timestamps),
        demand=_long_to_series(price_rows, "bus", "demand", timestamps),
        degenerate={r["bus"]: r["degenerate"] == "true" for r in price_rows},
        co2_price=float(summary.get("co2_price", 0.0)),
        co2_emissions=float(summary.get("co2_emissions", 0.0)),
        info={"iterations": int(summary.get("iterations", 0))},
    )
