"""Domain types for the electricity system and cost preprocessing.

All containers are frozen dataclasses.  Time series are stored as read-only
numpy arrays so a :class:`Network` can be shared between scenario builds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

STORAGE_KINDS = ("charger", "store", "discharger")
COUPLINGS = ("fixed_ep", "free", "hub_member")


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def annuity_factor(rate: float, lifetime: float) -> float:
    """Constant annual payment per unit of upfront investment.

    ``rate / (1 - (1 + rate) ** -lifetime)``; for a zero rate this reduces to
    straight-line ``1 / lifetime``.
    """
    if not (math.isfinite(rate) and math.isfinite(lifetime)):
        raise ValueError(f"non-finite annuity input: rate={rate}, lifetime={lifetime}")
    if lifetime < 1:
        raise ValueError(f"lifetime must be >= 1, got {lifetime}")
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    if rate == 0:
        return 1.0 / lifetime
    # expm1/log1p keep the denominator accurate for tiny rates
    return rate / -math.expm1(-lifetime * math.log1p(rate))


@dataclass(frozen=True)
class SnapshotSet:
    timestamps: tuple
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "timestamps", tuple(str(t) for t in self.timestamps))
        object.__setattr__(self, "weights", _frozen_array(self.weights))

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def total_hours(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True)
class Bus:
    id: str
    country: str
    coordinates: Optional[tuple] = None


@dataclass(frozen=True)
class Carrier:
    name: str
    emission_factor: float = 0.0
    variable_renewable: bool = False


@dataclass(frozen=True)
class Generator:
    id: str
    bus: str
    carrier: str
    existing_capacity: float = 0.0
    extendable: bool = False
    capacity_min: float = 0.0
    capacity_max: float = math.inf
    capital_cost: float = 0.0
    marginal_cost: float = 0.0
    availability: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.availability is not None:
            object.__setattr__(self, "availability", _frozen_array(self.availability))


@dataclass(frozen=True)
class Line:
    id: str
    bus_from: str
    bus_to: str
    reactance: float
    length: float = 1.0
    existing_capacity: float = 0.0
    extendable: bool = False
    capacity_max: float = math.inf
    capital_cost: float = 0.0
    availability: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.availability is not None:
            object.__setattr__(self, "availability", _frozen_array(self.availability))


@dataclass(frozen=True)
class StorageComponentSpec:
    """Raw techno-economic data of one storage component.

    ``investment`` is EUR/kW for chargers and dischargers and EUR/kWh for
    stores.  ``efficiency`` is the conversion efficiency of a charger or
    discharger; stores carry a per-hour ``standing_efficiency`` instead.
    """

    kind: str
    investment: float
    fom_frac: float = 0.0
    lifetime: float = 20.0
    efficiency: float = 1.0
    discount_rate: float = 0.07
    standing_efficiency: float = 1.0

    def violations(self, owner: str = "") -> list:
        tag = f"{owner}.{self.kind}" if owner else self.kind
        out = []
        if self.kind not in STORAGE_KINDS:
            out.append(Violation(tag, "unknown storage component kind", self.kind))
        if not self.investment >= 0:
            out.append(Violation(tag, "investment must be >= 0", self.investment))
        if not self.lifetime >= 1:
            out.append(Violation(tag, "lifetime must be >= 1", self.lifetime))
        if not 0 < self.efficiency <= 1:
            out.append(Violation(tag, "efficiency out of (0,1]", self.efficiency))
        if not 0 < self.standing_efficiency <= 1:
            out.append(Violation(tag, "standing efficiency out of (0,1]", self.standing_efficiency))
        if not 0 <= self.fom_frac < 1:
            out.append(Violation(tag, "fom fraction out of [0,1)", self.fom_frac))
        if not self.discount_rate >= 0:
            out.append(Violation(tag, "discount rate must be >= 0", self.discount_rate))
        return out


def annualized_cost(spec: StorageComponentSpec) -> float:
    """Annualised capital plus fixed O&M, EUR per kW (or kWh) and year."""
    problems = spec.violations()
    if problems:
        raise ValueError("; ".join(str(p) for p in problems))
    return spec.investment * annuity_factor(spec.discount_rate, spec.lifetime) + spec.investment * spec.fom_frac


@dataclass(frozen=True)
class StorageTech:
    """A charger/store/discharger chain located at one bus.

    ``shared_converter`` marks technologies whose charger and discharger are
    one physical device (battery inverter); they always keep equal sizes.
    Existing capacities are in MW (charger, discharger) and MWh (store).
    """

    id: str
    bus: str
    charger: StorageComponentSpec
    store: StorageComponentSpec
    discharger: StorageComponentSpec
    ep_ratio_hours: Optional[float] = None
    coupling: str = "free"
    hub_id: Optional[str] = None
    shared_converter: bool = False
    extendable: bool = True
    existing_charger: float = 0.0
    existing_store: float = 0.0
    existing_discharger: float = 0.0
    inflow: Optional[np.ndarray] = None
    spillage_allowed: bool = False
    dispatch_epsilon_cost: float = 0.01
    energy_level_cost: float = 0.0
    carrier: str = "storage"

    def __post_init__(self):
        if self.inflow is not None:
            object.__setattr__(self, "inflow", _frozen_array(self.inflow))

    def component(self, kind: str) -> StorageComponentSpec:
        return {"charger": self.charger, "store": self.store, "discharger": self.discharger}[kind]

    def existing(self, kind: str) -> float:
        return {
            "charger": self.existing_charger,
            "store": self.existing_store,
            "discharger": self.existing_discharger,
        }[kind]


@dataclass(frozen=True)
class Violation:
    entity: str
    rule: str
    value: object = None

    def __str__(self) -> str:
        if self.value is None:
            return f"{self.entity}: {self.rule}"
        return f"{self.entity}: {self.rule} ({self.value})"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if not self.violations:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


@dataclass(frozen=True)
class Network:
    buses: tuple
    lines: tuple
    generators: tuple
    storage: tuple
    carriers: tuple
    snapshots: SnapshotSet
    loads: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        for attr in ("buses", "lines", "generators", "storage", "carriers"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        object.__setattr__(self, "loads", {k: _frozen_array(v) for k, v in self.loads.items()})

    @property
    def bus_ids(self) -> list:
        return [b.id for b in self.buses]

    def bus_index(self) -> dict:
        return {b.id: i for i, b in enumerate(self.buses)}

    def carrier_map(self) -> dict:
        return {c.name: c for c in self.carriers}

    def load(self, bus_id: str) -> np.ndarray:
        """Demand series of a bus in MW; zero when the bus has no load."""
        if bus_id in self.loads:
            return self.loads[bus_id]
        return np.zeros(len(self.snapshots))

    def load_matrix(self) -> np.ndarray:
        return np.vstack([self.load(b.id) for b in self.buses]) if self.buses else np.zeros((0, len(self.snapshots)))

    def generator_availability(self, gen: Generator) -> np.ndarray:
        if gen.availability is None:
            return np.ones(len(self.snapshots))
        return gen.availability

    def line_availability(self, line: Line) -> np.ndarray:
        if line.availability is None:
            return np.ones(len(self.snapshots))
        return line.availability

    def storage_by_id(self, tech_id: str) -> StorageTech:
        for s in self.storage:
            if s.id == tech_id:
                return s
        raise KeyError(tech_id)

    def replace(self, **changes) -> "Network":
        from dataclasses import replace

        return replace(self, **changes)


def _check_series(out, entity, series, n, lo, hi, label, lo_open=False):
    if series is None:
        return
    if len(series) != n:
        out.append(Violation(entity, f"{label} length != snapshot count", len(series)))
        return
    arr = np.asarray(series, dtype=float)
    bad_lo = arr <= lo if lo_open else arr < lo
    if not np.all(np.isfinite(arr)) or np.any(bad_lo) or np.any(arr > hi):
        bounds = f"({lo},{hi}]" if lo_open else f"[{lo},{hi}]"
        worst = arr[~np.isfinite(arr) | bad_lo | (arr > hi)][0]
        out.append(Violation(entity, f"{label} out of {bounds}", float(worst)))


def _components(buses, lines) -> list:
    """Connected components as lists of bus indices (union-find)."""
    parent = list(range(len(buses)))
    index = {b.id: i for i, b in enumerate(buses)}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for ln in lines:
        if ln.bus_from in index and ln.bus_to in index:
            a, b = find(index[ln.bus_from]), find(index[ln.bus_to])
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict = {}
    for i in range(len(buses)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def validate_network(network: Network) -> ValidationReport:
    """Collect every invariant violation of ``network``; never raises."""
    out: list = []
    n = len(network.snapshots)
    weights = network.snapshots.weights
    if n == 0:
        out.append(Violation("snapshots", "no snapshots"))
    if len(weights) != n:
        out.append(Violation("snapshots", "weight count != snapshot count", len(weights)))
    elif np.any(~np.isfinite(weights)) or np.any(weights <= 0):
        out.append(Violation("snapshots", "weights must be > 0"))

    bus_ids = set()
    for b in network.buses:
        if b.id in bus_ids:
            out.append(Violation(b.id, "duplicate bus id"))
        bus_ids.add(b.id)

    carriers = set()
    for c in network.carriers:
        if c.name in carriers:
            out.append(Violation(c.name, "duplicate carrier name"))
        carriers.add(c.name)
        if not c.emission_factor >= 0:
            out.append(Violation(c.name, "emission factor must be >= 0", c.emission_factor))

    seen = set()
    for g in network.generators:
        if g.id in seen:
            out.append(Violation(g.id, "duplicate generator id"))
        seen.add(g.id)
        if g.bus not in bus_ids:
            out.append(Violation(g.id, "unknown bus", g.bus))
        if g.carrier not in carriers:
            out.append(Violation(g.id, "unknown carrier", g.carrier))
        if not 0 <= g.capacity_min <= g.capacity_max:
            out.append(Violation(g.id, "capacity bounds violate 0 <= min <= max", (g.capacity_min, g.capacity_max)))
        elif not g.capacity_min <= g.existing_capacity <= g.capacity_max:
            out.append(Violation(g.id, "existing capacity outside [min, max]", g.existing_capacity))
        if g.capital_cost < 0 or not math.isfinite(g.capital_cost):
            out.append(Violation(g.id, "capital cost must be finite and >= 0", g.capital_cost))
        if not math.isfinite(g.marginal_cost):
            out.append(Violation(g.id, "marginal cost must be finite", g.marginal_cost))
        _check_series(out, g.id, g.availability, n, 0.0, 1.0, "availability")

    seen = set()
    for ln in network.lines:
        if ln.id in seen:
            out.append(Violation(ln.id, "duplicate line id"))
        seen.add(ln.id)
        for end in (ln.bus_from, ln.bus_to):
            if end not in bus_ids:
                out.append(Violation(ln.id, "unknown bus", end))
        if ln.bus_from == ln.bus_to:
            out.append(Violation(ln.id, "line connects a bus to itself", ln.bus_from))
        if not ln.reactance > 0:
            out.append(Violation(ln.id, "reactance must be > 0", ln.reactance))
        if not ln.existing_capacity >= 0:
            out.append(Violation(ln.id, "existing capacity must be >= 0", ln.existing_capacity))
        if not ln.capacity_max >= ln.existing_capacity:
            out.append(Violation(ln.id, "capacity max below existing capacity", ln.capacity_max))
        if not ln.length >= 0:
            out.append(Violation(ln.id, "length must be >= 0", ln.length))
        _check_series(out, ln.id, ln.availability, n, 0.0, 1.0, "availability", lo_open=True)

    seen = set()
    hubs: dict = {}
    for s in network.storage:
        if s.id in seen:
            out.append(Violation(s.id, "duplicate storage id"))
        seen.add(s.id)
        if s.bus not in bus_ids:
            out.append(Violation(s.id, "unknown bus", s.bus))
        for kind in STORAGE_KINDS:
            spec = s.component(kind)
            if spec.kind != kind:
                out.append(Violation(s.id, f"{kind} slot holds a {spec.kind} spec"))
            out.extend(spec.violations(s.id))
            if not s.existing(kind) >= 0:
                out.append(Violation(s.id, f"existing {kind} capacity must be >= 0", s.existing(kind)))
        if s.coupling not in COUPLINGS:
            out.append(Violation(s.id, "unknown coupling", s.coupling))
        if s.coupling == "fixed_ep" and not (s.ep_ratio_hours is not None and s.ep_ratio_hours > 0):
            out.append(Violation(s.id, "fixed_ep coupling requires ep_ratio_hours > 0", s.ep_ratio_hours))
        if s.ep_ratio_hours is not None and not s.ep_ratio_hours > 0:
            out.append(Violation(s.id, "ep_ratio_hours must be > 0", s.ep_ratio_hours))
        if (s.hub_id is not None) != (s.coupling == "hub_member"):
            out.append(Violation(s.id, "hub_id present iff coupling is hub_member", s.hub_id))
        if s.hub_id is not None:
            hubs.setdefault(s.hub_id, set()).add(s.bus)
        if not s.dispatch_epsilon_cost >= 0:
            out.append(Violation(s.id, "dispatch epsilon cost must be >= 0", s.dispatch_epsilon_cost))
        _check_series(out, s.id, s.inflow, n, 0.0, math.inf, "inflow")
    for hub, buses in hubs.items():
        if len(buses) > 1:
            out.append(Violation(hub, "hub members across buses", ",".join(sorted(buses))))

    for bus_id, series in network.loads.items():
        if bus_id not in bus_ids:
            out.append(Violation(bus_id, "load at unknown bus"))
        _check_series(out, f"load:{bus_id}", series, n, 0.0, math.inf, "load")

    gen_buses = {g.bus for g in network.generators} | {
        s.bus for s in network.storage if s.inflow is not None
    }
    for comp in _components(network.buses, network.lines):
        ids = [network.buses[i].id for i in comp]
        has_load = any(np.any(network.load(b) > 0) for b in ids if b in network.loads)
        if has_load and not any(b in gen_buses for b in ids):
            out.append(Violation(ids[0], "connected component with load but no generator", ",".join(ids)))

    return ValidationReport(tuple(out))
