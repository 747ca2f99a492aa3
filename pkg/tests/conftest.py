import contextlib
from pathlib import Path

import numpy as np
import pytest

from storagevalue import testnets
from storagevalue.core import Bus, Carrier, Generator, Network, SnapshotSet, StorageComponentSpec, StorageTech
from storagevalue.formulation import build_problem
from storagevalue.ingest import ScenarioConfig, parse_network_bundle, parse_scenario
from storagevalue.results import extract_results
from storagevalue.solver import solve

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = testnets.FIXTURE_DIR

_ACCEPTANCE_LINES: list = []


class _Run:
    """Network, scenario, LP, solution and extracted tables of one solve."""

    def __init__(self, network, scenario):
        self.network = network
        self.scenario = scenario
        self.lp = build_problem(network, scenario)
        self.solution = solve(self.lp, scenario.solver_options())
        self.results = (extract_results(network, scenario, self.lp, self.solution)
                        if self.solution.optimal else None)


_RUNS: dict = {}


def fixture_run(bundle: str, scenario: str) -> _Run:
    key = (bundle, scenario)
    if key not in _RUNS:
        net = parse_network_bundle(FIXTURES / bundle)
        scn = parse_scenario(testnets.scenario_path(scenario))
        _RUNS[key] = _Run(net, scn)
    return _RUNS[key]


@pytest.fixture(scope="session")
def five_bus_runs():
    return {s: fixture_run("five-bus", s) for s in ("fixed_ep", "variable_ep", "h2_hub")}


@pytest.fixture(scope="session")
def wind_lull_run():
    return fixture_run("wind-lull", "fixed_ep")


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line per acceptance criterion."""

    @contextlib.contextmanager
    def record(number, title):
        detail = {}
        try:
            yield detail
        except BaseException:
            _ACCEPTANCE_LINES.append(f"criterion {number} FAIL  {title} {_fmt(detail)}")
            raise
        _ACCEPTANCE_LINES.append(f"criterion {number} PASS  {title} {_fmt(detail)}")

    return record


def _fmt(detail: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in detail.items())


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


# -------------------------------------------------------- small networks
def hours(n):
    return SnapshotSet(tuple(f"t{t:03d}" for t in range(n)), np.ones(n))


def spec(kind, investment=0.0, efficiency=1.0, lifetime=20, fom=0.0, standing=1.0):
    return StorageComponentSpec(kind, investment, fom, lifetime, efficiency, 0.07, standing)


def lossless_storage(tech_id="store", bus="n1", **kwargs):
    return StorageTech(tech_id, bus, spec("charger", 100.0), spec("store", 10.0), spec("discharger", 100.0),
                       **kwargs)


def solar_night_network(n_days=2, storage=True, solar_capex=20_000.0):
    """Single bus, solar only, flat demand: storage is the only way through the night."""
    n = 24 * n_days
    hour = np.arange(n) % 24
    cf = np.clip(np.sin(np.pi * (hour - 6) / 12.0), 0.0, None).round(4)
    gens = (Generator("solar", "n1", "solar", extendable=True, capital_cost=solar_capex, availability=cf),)
    techs = (lossless_storage(),) if storage else ()
    return Network(
        buses=(Bus("n1", "AA"),),
        lines=(),
        generators=gens,
        storage=techs,
        carriers=(Carrier("solar", 0.0, True),),
        snapshots=hours(n),
        loads={"n1": np.full(n, 10.0)},
        name="solar-night",
    )


def plain_scenario(**kwargs):
    kwargs.setdefault("storage_mode", "variable_ep")
    kwargs.setdefault("equity_fraction", 0.0)
    return ScenarioConfig(**kwargs)
