"""Deterministic synthetic networks shipped as fixture bundles.

The bundles under ``storagevalue/fixtures`` are generated by
:func:`write_fixtures`; regenerating them must reproduce the committed files
byte for byte, which the test suite checks.
"""
from __future__ import annotations

from pathlib import Path

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
)
from .ingest import ScenarioConfig, format_scenario, write_network_bundle
from .techdata import BATTERY, H2_HIGH, H2_LOW

FIXTURE_DIR = Path(__file__).with_name("fixtures")
HOURS = 168

# annual capital costs in EUR/MW/yr (lines: EUR/MW/km/yr)
WIND_CAPEX = 110_000.0
SOLAR_CAPEX = 45_000.0
LINE_CAPEX_PER_KM = 40.0

CARRIERS = (
    Carrier("wind", 0.0, True),
    Carrier("solar", 0.0, True),
    Carrier("gas", 0.35),
    Carrier("hydro", 0.0),
    Carrier("storage", 0.0),
    Carrier("H2", 0.0),
    Carrier("battery", 0.0),
)


def hourly_snapshots(n: int = HOURS, start_day: int = 1) -> SnapshotSet:
    stamps = [f"2030-01-{start_day + t // 24:02d}T{t % 24:02d}:00" for t in range(n)]
    return SnapshotSet(tuple(stamps), np.ones(n))


def _round(x: np.ndarray, digits: int = 4) -> np.ndarray:
    return np.round(np.asarray(x, dtype=float), digits)


def wind_profile(rng: np.random.Generator, n: int, mean: float, lulls=()) -> np.ndarray:
    """AR(1) latent weather mapped through a logistic curve, with forced lulls."""
    z = np.empty(n)
    z[0] = rng.normal()
    for t in range(1, n):
        z[t] = 0.95 * z[t - 1] + np.sqrt(1 - 0.95**2) * rng.normal()
    offset = np.log(mean / (1 - mean))
    cf = 1.0 / (1.0 + np.exp(-(offset + 1.3 * z)))
    for start, stop in lulls:
        cf[start:stop] *= 0.05
    return _round(np.clip(cf, 0.0, 1.0))


def solar_profile(rng: np.random.Generator, n: int, peak: float = 0.7) -> np.ndarray:
    hour = np.arange(n) % 24
    shape = np.clip(np.sin(np.pi * (hour - 7) / 10.0), 0.0, None)
    clouds = np.repeat(rng.uniform(0.4, 1.0, size=(n + 23) // 24), 24)[:n]
    return _round(peak * shape * clouds)


def load_profile(n: int, mean: float) -> np.ndarray:
    hour = np.arange(n) % 24
    daily = 1.0 + 0.15 * np.sin(2 * np.pi * (hour - 9) / 24.0)
    return _round(mean * daily, 3)


def h2_tech(tech_id, bus, components, hub_id="H2", ep_ratio=100.0) -> StorageTech:
    return StorageTech(
        id=tech_id,
        bus=bus,
        charger=components["charger"],
        store=components["store"],
        discharger=components["discharger"],
        ep_ratio_hours=ep_ratio,
        coupling="hub_member",
        hub_id=f"{hub_id}_{bus}",
        carrier="H2",
    )


def battery_tech(tech_id, bus) -> StorageTech:
    return StorageTech(
        id=tech_id,
        bus=bus,
        charger=BATTERY["charger"],
        store=BATTERY["store"],
        discharger=BATTERY["discharger"],
        ep_ratio_hours=4.0,
        shared_converter=True,
        carrier="battery",
    )


def single_bus() -> Network:
    """One bus, two dispatchable generators; the expensive one sets the price."""
    snaps = hourly_snapshots(4)
    gens = (
        Generator("cheap", "n1", "gas", existing_capacity=60.0, marginal_cost=20.0),
        Generator("peaker", "n1", "gas", existing_capacity=200.0, marginal_cost=50.0),
    )
    return Network(
        buses=(Bus("n1", "AA"),),
        lines=(),
        generators=gens,
        storage=(),
        carriers=(Carrier("gas", 0.35),),
        snapshots=snaps,
        loads={"n1": np.array([100.0, 120.0, 90.0, 110.0])},
        name="single-bus",
    )


def two_bus() -> Network:
    """Cheap remote generation behind a 100 MW line."""
    snaps = hourly_snapshots(24)
    load = load_profile(24, 150.0)
    gens = (
        Generator("cheap", "a", "gas", existing_capacity=400.0, marginal_cost=10.0),
        Generator("local", "b", "gas", existing_capacity=400.0, marginal_cost=60.0),
    )
    lines = (Line("ab", "a", "b", reactance=0.1, length=100.0, existing_capacity=100.0),)
    return Network(
        buses=(Bus("a", "AA", (50.0, 8.0)), Bus("b", "AA", (51.0, 9.0))),
        lines=lines,
        generators=gens,
        storage=(),
        carriers=(Carrier("gas", 0.35),),
        snapshots=snaps,
        loads={"b": load},
        name="two-bus",
    )


def five_bus() -> Network:
    """Two countries, three KVL cycles, wind/solar/hydro and hydrogen + battery storage."""
    rng = np.random.default_rng(20300101)
    n = HOURS
    snaps = hourly_snapshots(n)
    buses = (
        Bus("b1", "AA", (54.0, 8.0)),
        Bus("b2", "AA", (52.5, 9.5)),
        Bus("b3", "AA", (51.0, 7.5)),
        Bus("b4", "BB", (53.5, 12.0)),
        Bus("b5", "BB", (55.5, 11.0)),
    )
    lull = [(60, 110)]
    wind = {b: wind_profile(rng, n, m, lull) for b, m in (("b1", 0.45), ("b4", 0.40), ("b5", 0.42))}
    solar = {b: solar_profile(rng, n) for b in ("b2", "b3")}
    gens = []
    for b, cf in wind.items():
        gens.append(Generator(f"wind_{b}", b, "wind", extendable=True, capital_cost=WIND_CAPEX,
                              marginal_cost=0.01, capacity_max=5000.0, availability=cf))
    for b, cf in solar.items():
        gens.append(Generator(f"solar_{b}", b, "solar", extendable=True, capital_cost=SOLAR_CAPEX,
                              marginal_cost=0.0, capacity_max=5000.0, availability=cf))
    for b in ("b1", "b4"):
        gens.append(Generator(f"gas_{b}", b, "gas", existing_capacity=300.0, marginal_cost=80.0))
    specs = (("l12", "b1", "b2"), ("l23", "b2", "b3"), ("l31", "b3", "b1"), ("l34", "b3", "b4"),
             ("l45", "b4", "b5"), ("l51", "b5", "b1"), ("l24", "b2", "b4"))
    coords = {b.id: np.array(b.coordinates) for b in buses}
    extendable = {"l12", "l24", "l45"}
    lines = []
    for lid, u, v in specs:
        km = float(np.round(111.0 * np.linalg.norm(coords[u] - coords[v]), 1))
        lines.append(Line(lid, u, v, reactance=round(0.0003 * km, 5), length=km, existing_capacity=400.0,
                          extendable=lid in extendable, capital_cost=LINE_CAPEX_PER_KM * km))
    inflow = _round(np.full(n, 60.0) + 20.0 * np.sin(np.arange(n) * 2 * np.pi / n), 3)
    hydro = StorageTech(
        id="hydro_b5",
        bus="b5",
        charger=StorageComponentSpec("charger", 0.0, 0.0, 80, 1.0),
        store=StorageComponentSpec("store", 0.0, 0.0, 80, 1.0),
        discharger=StorageComponentSpec("discharger", 0.0, 0.0, 80, 0.9),
        extendable=False,
        existing_store=8000.0,
        existing_discharger=150.0,
        inflow=inflow,
        spillage_allowed=True,
        carrier="hydro",
    )
    storage = [hydro]
    for b in ("b1", "b4"):
        storage.append(h2_tech(f"h2_low_{b}", b, H2_LOW))
        storage.append(h2_tech(f"h2_high_{b}", b, H2_HIGH))
    storage.append(battery_tech("battery_b2", "b2"))
    loads = {"b1": 350.0, "b2": 450.0, "b3": 300.0, "b4": 400.0, "b5": 200.0}
    return Network(
        buses=buses,
        lines=tuple(lines),
        generators=tuple(gens),
        storage=tuple(storage),
        carriers=CARRIERS,
        snapshots=snaps,
        loads={b: load_profile(n, m) for b, m in loads.items()},
        name="five-bus",
    )


def wind_lull() -> Network:
    """Single wind-only bus with two-day lulls and both hydrogen variants.

    Each three-day block has one windy day followed by 48 near-calm hours.
    Charging windows are short, so conversion efficiency decides how much
    charger and store must be built and the efficient, more expensive
    hydrogen chain wins outright.
    """
    n = HOURS
    snaps = hourly_snapshots(n)
    windy = (0.62, 0.55, 0.60)
    cf = np.concatenate([np.concatenate([np.full(24, level), np.full(48, 0.02)]) for level in windy])[:n]
    gens = (
        Generator("wind", "w1", "wind", extendable=True, capital_cost=WIND_CAPEX, marginal_cost=0.01,
                  availability=cf),
    )
    storage = (
        h2_tech("h2_low", "w1", H2_LOW),
        h2_tech("h2_high", "w1", H2_HIGH),
    )
    return Network(
        buses=(Bus("w1", "AA"),),
        lines=(),
        generators=gens,
        storage=storage,
        carriers=CARRIERS,
        snapshots=snaps,
        loads={"w1": np.full(n, 100.0)},
        name="wind-lull",
    )


NETWORKS = {
    "single-bus": single_bus,
    "two-bus": two_bus,
    "five-bus": five_bus,
    "wind-lull": wind_lull,
}

SCENARIOS = {
    "fixed_ep": ScenarioConfig(storage_mode="fixed_ep", co2_cap=0.0, name="fixed_ep"),
    "variable_ep": ScenarioConfig(storage_mode="variable_ep", co2_cap=0.0, name="variable_ep"),
    "h2_hub": ScenarioConfig(storage_mode="h2_hub", co2_cap=0.0, name="h2_hub"),
}


def fixture_path(name: str) -> Path:
    """Directory of a committed network bundle or the scenarios folder."""
    return FIXTURE_DIR / name


def scenario_path(name: str) -> Path:
    return FIXTURE_DIR / "scenarios" / f"{name}.cfg"


def write_fixtures(root=None) -> Path:
    root = Path(root) if root is not None else FIXTURE_DIR
    for name, make in NETWORKS.items():
        write_network_bundle(make(), root / name)
    scen_dir = root / "scenarios"
    scen_dir.mkdir(parents=True, exist_ok=True)
    for name, cfg in SCENARIOS.items():
        (scen_dir / f"{name}.cfg").write_text(format_scenario(cfg), encoding="utf-8")
    return root
