"""Capacity-expansion LP: network + scenario -> :class:`LinearProgram`.

Variable kinds (registry ``kind``):

``G`` generator capacity, ``F`` line capacity, ``H_charger`` / ``H_store`` /
``H_discharger`` storage component capacities, ``g`` dispatch, ``f`` signed
line flow, ``h_charge`` / ``h_discharge`` storage power, ``e`` energy level,
``spill`` spillage.  Capacities are MW (stores MWh); all costs are annual.

Capital cost is charged on expansion above existing capacity; the constant
``-c * existing`` lands in ``LinearProgram.offset``.  Annual capital costs are
multiplied by the modelled share of a year (``sum(w) / 8760``) so that a
one-week run weighs investment against one week of operation.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .core import Network, StorageTech, annualized_cost, validate_network
from .graph import cycle_basis
from .ingest import ScenarioConfig, ValidationFailed
from .lp import EQ, GE, LE, InfeasibleBounds, LinearProgram, LPBuilder

VARIABLE_KINDS = ("G", "F", "H_charger", "H_store", "H_discharger", "g", "f", "h_charge", "h_discharge", "e", "spill")
ROW_KINDS = (
    "balance", "gen_availability", "flow_upper", "flow_lower", "kvl", "charge_limit", "discharge_limit",
    "energy_limit", "storage_balance", "ep_ratio", "converter_ratio", "co2", "equity", "line_volume",
)
CAPACITY_KIND = {"charger": "H_charger", "store": "H_store", "discharger": "H_discharger"}
KW_PER_MW = 1000.0
HOURS_PER_YEAR = 8760.0


class EmptySnapshots(ValueError):
    pass


class HubMembersAcrossBuses(ValueError):
    pass


@dataclass(frozen=True)
class StoreGroup:
    """One energy store and the technologies charging/discharging it."""

    id: str
    bus: str
    members: tuple  # StorageTech
    owner: StorageTech  # supplies the store's cost and standing loss


def store_groups(network: Network, mode: str) -> list:
    """Stores of the model; under ``h2_hub`` hub members share one store."""
    groups: "OrderedDict[str, list]" = OrderedDict()
    for s in network.storage:
        key = s.hub_id if (mode == "h2_hub" and s.coupling == "hub_member") else s.id
        groups.setdefault(key, []).append(s)
    out = []
    for key, members in groups.items():
        buses = {m.bus for m in members}
        if len(buses) > 1:
            raise HubMembersAcrossBuses(f"hub {key!r} spans buses {sorted(buses)}")
        out.append(StoreGroup(key, members[0].bus, tuple(members), members[0]))
    return out


def _epsilon(tech: StorageTech, scenario: ScenarioConfig) -> float:
    return tech.dispatch_epsilon_cost if scenario.epsilon_cost is None else scenario.epsilon_cost


class _Model:
    """Shared state while the constraint families are added."""

    def __init__(self, network: Network, scenario: ScenarioConfig):
        self.net = network
        self.scn = scenario
        self.b = LPBuilder()
        self.T = len(network.snapshots)
        self.w = np.asarray(network.snapshots.weights, dtype=float)
        self.years = float(self.w.sum()) / HOURS_PER_YEAR
        # per bus, per snapshot: list of (var, coeff) injections
        self.injections = {bus.id: [[] for _ in range(self.T)] for bus in network.buses}
        self.groups = store_groups(network, scenario.storage_mode)

    def inject(self, bus, t, var, coeff):
        self.injections[bus][t].append((var, coeff))


def _capacity_variable(m: _Model, kind, entity, existing, extendable, cap_min, cap_max, capital_cost):
    if extendable:
        lo, hi = max(cap_min, existing), cap_max
    else:
        lo = hi = existing
    if lo > hi:
        raise InfeasibleBounds(f"{kind}[{entity}]: lower {lo} > upper {hi}")
    cost = capital_cost * m.years
    v = m.b.add_variable(kind, entity, -1, lo, hi, cost)
    m.b.offset -= cost * existing
    return v


def add_generator_constraints(m: _Model) -> None:
    """Capacity bounds and ``g <= availability * G``."""
    for gen in m.net.generators:
        G = _capacity_variable(m, "G", gen.id, gen.existing_capacity, gen.extendable, gen.capacity_min,
                               gen.capacity_max, gen.capital_cost)
        avail = m.net.generator_availability(gen)
        if gen.extendable:
            g = m.b.add_series("g", gen.id, m.T, 0.0, np.inf, gen.marginal_cost * m.w)
            for t in range(m.T):
                m.b.add_row("gen_availability", gen.id, t, [(g[t], 1.0), (G, -avail[t])], LE, 0.0)
        else:
            g = m.b.add_series("g", gen.id, m.T, 0.0, avail * gen.existing_capacity, gen.marginal_cost * m.w)
        for t in range(m.T):
            m.inject(gen.bus, t, g[t], 1.0)


def add_flow_constraints(m: _Model, cycles=None) -> None:
    """Signed flow limits and one KVL row per cycle and snapshot."""
    net = m.net
    cycles = cycles if cycles is not None else cycle_basis(net)
    flows = {}
    for ln in net.lines:
        F = _capacity_variable(m, "F", ln.id, ln.existing_capacity, ln.extendable, 0.0, ln.capacity_max,
                               ln.capital_cost)
        avail = net.line_availability(ln)
        if ln.extendable:
            f = m.b.add_series("f", ln.id, m.T, -np.inf, np.inf)
            for t in range(m.T):
                m.b.add_row("flow_upper", ln.id, t, [(f[t], 1.0), (F, -avail[t])], LE, 0.0)
                m.b.add_row("flow_lower", ln.id, t, [(f[t], -1.0), (F, -avail[t])], LE, 0.0)
        else:
            lim = avail * ln.existing_capacity
            f = m.b.add_series("f", ln.id, m.T, -lim, lim)
        flows[ln.id] = f
        for t in range(m.T):
            # positive f runs bus_from -> bus_to, so the sending bus loses it (-K f)
            m.inject(ln.bus_from, t, f[t], -1.0)
            m.inject(ln.bus_to, t, f[t], 1.0)
    C = cycles.matrix.tocsc()
    for c in range(C.shape[1]):
        start, end = C.indptr[c], C.indptr[c + 1]
        members = [(net.lines[l_idx], int(sign)) for l_idx, sign in zip(C.indices[start:end], C.data[start:end])]
        for t in range(m.T):
            m.b.add_row("kvl", f"cycle{c}", t,
                        [(flows[ln.id][t], sign * ln.reactance) for ln, sign in members], EQ, 0.0)


def add_storage_constraints(m: _Model) -> None:
    """Power limits, energy balance with cyclic wrap, energy limits and coupling."""
    scn, T, w = m.scn, m.T, m.w
    mode = scn.storage_mode
    for grp in m.groups:
        owner = grp.owner
        # store capacity (shared for hubs)
        store_existing = sum(s.existing_store for s in grp.members)
        store_ext = any(s.extendable for s in grp.members)
        H_store = _capacity_variable(m, "H_store", grp.id, store_existing, store_ext, 0.0, np.inf,
                                     annualized_cost(owner.store) * KW_PER_MW)
        chargers, dischargers = {}, {}
        for s in grp.members:
            eps = _epsilon(s, scn)
            H_ch = _capacity_variable(m, "H_charger", s.id, s.existing_charger, s.extendable, 0.0, np.inf,
                                      annualized_cost(s.charger) * KW_PER_MW)
            H_dis = _capacity_variable(m, "H_discharger", s.id, s.existing_discharger, s.extendable, 0.0, np.inf,
                                       annualized_cost(s.discharger) * KW_PER_MW)
            if s.extendable:
                hp = m.b.add_series("h_charge", s.id, T, 0.0, np.inf, eps * w)
                hm = m.b.add_series("h_discharge", s.id, T, 0.0, np.inf, eps * w)
                for t in range(T):
                    m.b.add_row("charge_limit", s.id, t, [(hp[t], 1.0), (H_ch, -1.0)], LE, 0.0)
                    m.b.add_row("discharge_limit", s.id, t, [(hm[t], 1.0), (H_dis, -1.0)], LE, 0.0)
            else:
                hp = m.b.add_series("h_charge", s.id, T, 0.0, s.existing_charger, eps * w)
                hm = m.b.add_series("h_discharge", s.id, T, 0.0, s.existing_discharger, eps * w)
            for t in range(T):
                m.inject(s.bus, t, hp[t], -1.0)
                m.inject(s.bus, t, hm[t], 1.0)
            chargers[s.id], dischargers[s.id] = hp, hm

            if s.extendable:
                fixed_ep = s.ep_ratio_hours is not None and (mode == "fixed_ep" or s.coupling == "fixed_ep")
                if fixed_ep or s.shared_converter:
                    m.b.add_row("converter_ratio", s.id, -1, [(H_ch, 1.0), (H_dis, -1.0)], EQ, 0.0)
                if fixed_ep and len(grp.members) == 1:
                    m.b.add_row("ep_ratio", s.id, -1, [(H_store, 1.0), (H_dis, -s.ep_ratio_hours)], EQ, 0.0)

        level_cost = owner.energy_level_cost * w
        if store_ext:
            e = m.b.add_series("e", grp.id, T, 0.0, np.inf, level_cost)
            for t in range(T):
                m.b.add_row("energy_limit", grp.id, t, [(e[t], 1.0), (H_store, -1.0)], LE, 0.0)
        else:
            e = m.b.add_series("e", grp.id, T, 0.0, store_existing, level_cost)

        inflow = np.zeros(T)
        spill = None
        for s in grp.members:
            if s.inflow is not None:
                inflow = inflow + s.inflow
        if any(s.inflow is not None and s.spillage_allowed for s in grp.members):
            spill = m.b.add_series("spill", grp.id, T, 0.0, np.inf)

        standing = owner.store.standing_efficiency
        for t in range(T):
            prev = (t - 1) % T  # cyclic: the first level follows the last
            coeffs = [(e[t], 1.0)]
            decay = standing ** w[t]
            if prev == t:
                coeffs = [(e[t], 1.0 - decay)]
            else:
                coeffs.append((e[prev], -decay))
            for s in grp.members:
                coeffs.append((chargers[s.id][t], -s.charger.efficiency * w[t]))
                coeffs.append((dischargers[s.id][t], w[t] / s.discharger.efficiency))
            if spill is not None:
                coeffs.append((spill[t], w[t]))
            m.b.add_row("storage_balance", grp.id, t, coeffs, EQ, w[t] * inflow[t])


def add_balance_constraints(m: _Model) -> None:
    """One equality per bus and snapshot: injections = demand."""
    for bus in m.net.buses:
        d = m.net.load(bus.id)
        for t in range(m.T):
            m.b.add_row("balance", bus.id, t, m.injections[bus.id][t], EQ, float(d[t]))


def add_emission_constraint(m: _Model, co2_cap: float) -> None:
    """Total weighted emissions below ``co2_cap`` (no row for an infinite cap)."""
    if not np.isfinite(co2_cap):
        return
    carriers = m.net.carrier_map()
    coeffs = []
    for gen in m.net.generators:
        rho = carriers[gen.carrier].emission_factor
        if rho > 0:
            g = m.b.variables.series("g", gen.id, m.T)
            coeffs.extend((g[t], rho * m.w[t]) for t in range(m.T))
    if coeffs:
        m.b.add_row("co2", "total", -1, coeffs, LE, co2_cap)


def add_equity_constraints(m: _Model, equity_fraction: float) -> None:
    """Each country generates at least ``equity_fraction`` of its own demand."""
    if equity_fraction <= 0:
        return
    countries: "OrderedDict[str, list]" = OrderedDict()
    for bus in m.net.buses:
        countries.setdefault(bus.country, []).append(bus.id)
    for country, bus_ids in countries.items():
        demand = sum(float(m.w @ m.net.load(b)) for b in bus_ids)
        members = set(bus_ids)
        coeffs = []
        for gen in m.net.generators:
            if gen.bus in members:
                g = m.b.variables.series("g", gen.id, m.T)
                coeffs.extend((g[t], m.w[t]) for t in range(m.T))
        if demand > 0 or coeffs:
            m.b.add_row("equity", country, -1, coeffs, GE, equity_fraction * demand)


def add_line_volume_constraint(m: _Model, frac: float) -> None:
    """``sum_l (F_l - F0_l) * length_l <= frac * sum_l F0_l * length_l``."""
    if not np.isfinite(frac):
        return
    ext = [ln for ln in m.net.lines if ln.extendable and ln.length > 0]
    if not ext:
        return
    existing_volume = sum(ln.existing_capacity * ln.length for ln in m.net.lines)
    coeffs = [(m.b.variables.index("F", ln.id), ln.length) for ln in ext]
    rhs = frac * existing_volume + sum(ln.existing_capacity * ln.length for ln in ext)
    m.b.add_row("line_volume", "total", -1, coeffs, LE, rhs)


def build_problem(network: Network, scenario: ScenarioConfig, cycles=None) -> LinearProgram:
    """Assemble the full capacity-expansion program for one scenario."""
    if len(network.snapshots) == 0:
        raise EmptySnapshots("network has no snapshots")
    report = validate_network(network)
    if not report.ok:
        raise ValidationFailed(report)
    m = _Model(network, scenario)
    add_generator_constraints(m)
    add_flow_constraints(m, cycles)
    add_storage_constraints(m)
    add_balance_constraints(m)
    add_emission_constraint(m, scenario.co2_cap)
    add_equity_constraints(m, scenario.equity_fraction)
    add_line_volume_constraint(m, scenario.line_volume_expansion_frac)
    lp = m.b.finish()
    lp.check()
    return lp


def problem_manifest(lp: LinearProgram) -> dict:
    """Row and column counts per kind (golden-file friendly)."""
    out = {"n_vars": lp.n_vars, "n_rows": lp.n_rows, "nnz": int(len(lp.vals)), "variables": {}, "constraints": {}}
    for kind in VARIABLE_KINDS:
        k = len(lp.variables.of_kind(kind))
        if k:
            out["variables"][kind] = k
    for kind in ROW_KINDS:
        k = len(lp.constraints.of_kind(kind))
        if k:
            out["constraints"][kind] = k
    return out
