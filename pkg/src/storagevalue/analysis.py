"""Storage valuation: levelised cost, market potential, system benefit, KPIs.

Storage ids follow ``<technology>_<bus>``; market potential aggregates all
buses of one technology under the ``<technology>`` label (an id that does
not end in its bus name is its own label).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import StorageComponentSpec, annualized_cost
from .formulation import KW_PER_MW
from .results import ModelResults

STORAGE_KINDS = ("charger", "store", "discharger")
ZERO_TOL = 1e-6


class ZeroDischarge(ValueError):
    """The technology never discharges, so its LCOS is undefined."""


class UnknownComponent(KeyError):
    pass


class MismatchedRuns(ValueError):
    pass


# ------------------------------------------------------------- static LCOS
@dataclass(frozen=True)
class LcosAssumptions:
    """Inputs of the static LCOS for a 1 kW discharger.

    ``charger_ratio`` sizes the charger relative to the discharger (1 under
    the fixed energy-to-power convention).
    """

    charger: StorageComponentSpec
    store: StorageComponentSpec
    discharger: StorageComponentSpec
    discharge_ratio_hours: float
    electricity_price: float  # EUR/MWh
    full_load_hours: float  # h per year
    charger_ratio: float = 1.0

    def __post_init__(self):
        if not self.full_load_hours > 0:
            raise ValueError(f"full_load_hours must be > 0, got {self.full_load_hours}")
        for name in ("discharge_ratio_hours", "electricity_price", "charger_ratio"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")

    @classmethod
    def from_components(cls, components: Mapping, **kwargs) -> "LcosAssumptions":
        return cls(components["charger"], components["store"], components["discharger"], **kwargs)


def roundtrip_efficiency(a: LcosAssumptions) -> float:
    return a.charger.efficiency * a.discharger.efficiency


def static_lcos(a: LcosAssumptions) -> float:
    """Annuity-based levelised cost in EUR per kWh discharged."""
    annual = (
        annualized_cost(a.charger) * a.charger_ratio
        + annualized_cost(a.store) * a.discharge_ratio_hours
        + annualized_cost(a.discharger)
    )
    # kWh charged per kW discharger and year, priced in EUR/kWh
    annual += a.electricity_price / KW_PER_MW * a.full_load_hours / roundtrip_efficiency(a)
    return annual / a.full_load_hours


def dcf_lcos(a: LcosAssumptions, horizon: Optional[int] = None) -> float:
    """Levelised cost from explicit year-by-year discounting.

    Investment happens at year 0 and again whenever a component reaches the
    end of its life inside the horizon; fixed O&M and electricity are paid
    and energy is delivered in years ``1..horizon``.  When lifetimes differ,
    components still alive at the horizon are credited their straight-line
    residual value.
    """
    parts = ((a.charger, a.charger_ratio), (a.store, a.discharge_ratio_hours), (a.discharger, 1.0))
    horizon = horizon or int(max(math.ceil(spec.lifetime) for spec, _ in parts))
    energy_price = a.electricity_price / KW_PER_MW / roundtrip_efficiency(a)
    cost = 0.0
    energy = 0.0
    for spec, size in parts:
        r = spec.discount_rate
        capex = spec.investment * size
        life = spec.lifetime
        year = 0.0
        while year < horizon:
            cost += capex / (1 + r) ** year
            end = year + life
            if end > horizon:
                cost -= capex * (end - horizon) / life / (1 + r) ** horizon
            year = end
        for t in range(1, horizon + 1):
            cost += spec.investment * spec.fom_frac * size / (1 + r) ** t
    r = a.discharger.discount_rate
    for t in range(1, horizon + 1):
        cost += energy_price * a.full_load_hours / (1 + r) ** t
        energy += a.full_load_hours / (1 + r) ** t
    return cost / energy


# ----------------------------------------------------------- modelled LCOS
@dataclass(frozen=True)
class ModelledLcos:
    tech: str
    bus: str
    lcos: float  # EUR/kWh
    full_load_hours: float  # h per year, against the discharger capacity
    ep_ratio: float  # h
    discharged_mwh: float  # over the modelled period
    mean_charge_price: float  # EUR/MWh
    market_potential: float  # MW of discharger expansion
    reported: bool = True


def _store_share(res: ModelResults, tech: str) -> float:
    group = res.storage_group[tech]
    members = [s for s, g in res.storage_group.items() if g == group]
    if len(members) == 1:
        return 1.0
    w = res.weights
    total = sum(float(w @ res.discharge[s]) for s in members)
    if total <= 0:
        return 1.0 / len(members)
    return float(w @ res.discharge[tech]) / total


def modelled_lcos(res: ModelResults, tech: str, min_mpi_mw: float = 0.0, min_flh: float = 0.0) -> ModelledLcos:
    """Levelised cost of one storage technology from an optimised run.

    Capital and fixed O&M of the optimised capacities (scaled to the modelled
    share of the year) plus the cost of charging electricity at nodal prices,
    divided by the discharged energy.  A shared store is split between its
    members by discharged energy.
    """
    if tech not in res.charge:
        raise UnknownComponent(tech)
    w = res.weights
    discharged = float(w @ res.discharge[tech])
    if discharged <= ZERO_TOL:
        raise ZeroDischarge(tech)
    ch = res.capacity("storage", tech, "charger")
    dis = res.capacity("storage", tech, "discharger")
    store = res.capacity("storage", res.storage_group[tech], "store")
    share = _store_share(res, tech)
    capital = ch.annual_cost * ch.optimal + dis.annual_cost * dis.optimal + share * store.annual_cost * store.optimal
    charged = float(w @ res.charge[tech])
    charge_cost = float(np.sum(res.prices[dis.bus] * res.charge[tech] * w))
    numerator = capital * res.years + charge_cost
    flh = discharged / dis.optimal / res.years if dis.optimal > 0 else math.inf
    ep = share * store.optimal / dis.optimal if dis.optimal > 0 else math.inf
    mpi = max(dis.expansion, 0.0)
    return ModelledLcos(
        tech=tech,
        bus=dis.bus,
        lcos=numerator / discharged / KW_PER_MW,
        full_load_hours=flh,
        ep_ratio=ep,
        discharged_mwh=discharged,
        mean_charge_price=charge_cost / charged if charged > 0 else 0.0,
        market_potential=mpi,
        reported=mpi >= min_mpi_mw and flh >= min_flh,
    )


def modelled_lcos_table(res: ModelResults, min_mpi_mw: float = 1.0, min_flh: float = 80.0) -> list:
    """Modelled LCOS for every discharging technology; filtered rows keep ``reported=False``."""
    out = []
    for tech in res.storage_techs():
        try:
            out.append(modelled_lcos(res, tech, min_mpi_mw, min_flh))
        except ZeroDischarge:
            continue
    return out


# -------------------------------------------------------- market potential
def technology_label(tech_id: str, bus: str) -> str:
    suffix = f"_{bus}"
    return tech_id[: -len(suffix)] if tech_id.endswith(suffix) and len(tech_id) > len(suffix) else tech_id


@dataclass(frozen=True)
class MpiRow:
    component: str  # "<technology>:<kind>"
    kind: str
    bus: str
    entity: str  # storage id or store group
    mpi: float  # MW, MWh for stores


@dataclass(frozen=True)
class MpiTable:
    kind: str
    rows: tuple

    @property
    def aggregate(self) -> float:
        return float(sum(r.mpi for r in self.rows))

    def by_component(self) -> dict:
        out: dict = {}
        for r in self.rows:
            out[r.component] = out.get(r.component, 0.0) + r.mpi
        return out


def _clamp(value: float, tol: float) -> float:
    """Expansion within ``tol`` of zero is solver noise and reported as 0."""
    if value < -tol:
        raise ValueError(f"expansion {value} below existing capacity")
    return value if value > tol else 0.0


def market_potential(res: ModelResults, kind: str, regions: Optional[Sequence[str]] = None,
                     tol: float = ZERO_TOL) -> MpiTable:
    """Expanded capacity of every ``kind`` storage component, per bus.

    ``regions`` restricts the rows to the listed buses; the aggregate is the
    sum over the rows kept.
    """
    if kind not in STORAGE_KINDS:
        raise ValueError(f"kind must be one of {STORAGE_KINDS}, got {kind!r}")
    keep = None if regions is None else set(regions)
    rows = []
    for r in res.storage_rows(kind):
        if keep is not None and r.bus not in keep:
            continue
        label = technology_label(r.id, r.bus)
        rows.append(MpiRow(f"{label}:{kind}", kind, r.bus, r.id, _clamp(r.expansion, tol)))
    return MpiTable(kind, tuple(rows))


def mpi_summary(res: ModelResults, regions: Optional[Sequence[str]] = None) -> dict:
    """Aggregate MPI per ``<technology>:<kind>`` over all storage kinds."""
    out: dict = {}
    for kind in STORAGE_KINDS:
        for comp, value in market_potential(res, kind, regions).by_component().items():
            out[comp] = out.get(comp, 0.0) + value
    return out


# ----------------------------------------------------------------- criteria
@dataclass(frozen=True)
class CriteriaVerdict:
    component: str
    mpi: dict  # scenario -> aggregate MPI
    verdict: str  # valuable | not_valuable
    threshold_pass: bool
    ranking: dict = field(default_factory=dict)  # other component -> above | below | equal


def evaluate_criteria(tables: Mapping[str, Mapping[str, float]], threshold: float = 1000.0,
                      comparisons: Sequence = (), tol: float = ZERO_TOL) -> list:
    """Apply the zero/positive, threshold and bigger-is-better rules.

    ``tables`` maps scenario name to ``{component: aggregate MPI}``.  A
    component is valuable when its MPI is positive in at least one scenario;
    it passes the threshold when some scenario exceeds ``threshold``.  Each
    pair in ``comparisons`` is ranked by the largest MPI over scenarios.
    """
    if not tables:
        raise ValueError("need at least one scenario table")
    components: list = []
    for table in tables.values():
        for comp in table:
            if comp not in components:
                components.append(comp)
    best = {c: max(float(t.get(c, 0.0)) for t in tables.values()) for c in components}
    ranking: dict = {c: {} for c in components}
    for a, b in comparisons:
        for c in (a, b):
            if c not in best:
                raise UnknownComponent(c)
        diff = best[a] - best[b]
        rel = "equal" if abs(diff) <= tol else ("above" if diff > 0 else "below")
        inverse = {"above": "below", "below": "above", "equal": "equal"}[rel]
        ranking[a][b] = rel
        ranking[b][a] = inverse
    out = []
    for c in components:
        per = {s: float(t.get(c, 0.0)) for s, t in tables.items()}
        valuable = any(v > tol for v in per.values())
        out.append(CriteriaVerdict(
            component=c,
            mpi=per,
            verdict="valuable" if valuable else "not_valuable",
            threshold_pass=any(v > threshold for v in per.values()),
            ranking=ranking[c],
        ))
    return out


# ---------------------------------------------------- whole-system benefit
@dataclass(frozen=True)
class SystemBenefit:
    net: float
    gross: float
    storage_capital: float


def storage_capital(res: ModelResults, techs: Optional[Sequence[str]] = None) -> float:
    """Capital of storage expansion charged in the objective (modelled period)."""
    chosen = None if techs is None else set(techs)
    total = 0.0
    for r in res.storage_rows():
        if chosen is not None:
            members = {r.id} if r.component != "store" else {s for s, g in res.storage_group.items() if g == r.id}
            if not members & chosen:
                continue
        total += r.annual_cost * max(r.expansion, 0.0)
    return total * res.years


def whole_system_benefit(without: ModelResults, with_: ModelResults,
                         techs: Optional[Sequence[str]] = None) -> SystemBenefit:
    """Cost difference between runs without and with a storage addition.

    ``techs`` names the added storage; by default it is every technology
    present only in ``with_``.
    """
    if without.timestamps != with_.timestamps or not np.array_equal(without.weights, with_.weights):
        raise MismatchedRuns("runs cover different snapshots")
    buses_a = set(without.prices)
    buses_b = set(with_.prices)
    if buses_a != buses_b:
        raise MismatchedRuns("runs cover different buses")
    if techs is None:
        techs = [t for t in with_.charge if t not in without.charge]
    net = without.objective - with_.objective
    cap = storage_capital(with_, techs) if techs else 0.0
    return SystemBenefit(net=net, gross=net + cap, storage_capital=cap)


# ---------------------------------------------------------------------- KPIs
@dataclass(frozen=True)
class StorageKpi:
    tech: str
    bus: str
    ep_ratio: float
    full_load_hours: float


@dataclass(frozen=True)
class KpiReport:
    total_system_cost: float  # EUR over the modelled period (the objective)
    annual_system_cost: float  # EUR/yr
    relative_investment: Optional[float]  # ct/kWh
    curtailment: Optional[float]  # % of demand
    demand_mwh: float
    co2_emissions: float
    storage: tuple

    def as_dict(self) -> dict:
        """JSON-ready mapping; undefined values become ``None``."""
        def clean(v):
            return None if v is None or (isinstance(v, float) and not math.isfinite(v)) else v

        return {
            "total_system_cost": self.total_system_cost,
            "annual_system_cost": self.annual_system_cost,
            "relative_investment_ct_per_kwh": clean(self.relative_investment),
            "curtailment_percent": clean(self.curtailment),
            "demand_mwh": self.demand_mwh,
            "co2_emissions": self.co2_emissions,
            "storage": [
                {"tech": s.tech, "bus": s.bus, "ep_ratio_hours": clean(s.ep_ratio),
                 "full_load_hours": clean(s.full_load_hours)}
                for s in self.storage
            ],
        }


def kpis(res: ModelResults) -> KpiReport:
    w = res.weights
    demand = float(sum(w @ d for d in res.demand.values()))
    curtailed = 0.0
    for r in res.capacities:
        if r.component_type == "generator" and r.renewable:
            curtailed += float(w @ np.maximum(res.available[r.id] - res.dispatch[r.id], 0.0))
    storage = []
    for tech in res.storage_techs():
        dis = res.capacity("storage", tech, "discharger")
        store = res.capacity("storage", res.storage_group[tech], "store")
        if dis.optimal > ZERO_TOL:
            share = _store_share(res, tech)
            ep = share * store.optimal / dis.optimal
            flh = float(w @ res.discharge[tech]) / dis.optimal / res.years
        else:
            ep = flh = math.nan
        storage.append(StorageKpi(tech, dis.bus, ep, flh))
    return KpiReport(
        total_system_cost=res.objective,
        annual_system_cost=res.objective / res.years,
        # EUR/MWh -> ct/kWh
        relative_investment=res.objective / demand * 0.1 if demand > 0 else None,
        curtailment=100.0 * curtailed / demand if demand > 0 else None,
        demand_mwh=demand,
        co2_emissions=res.co2_emissions,
        storage=tuple(storage),
    )
