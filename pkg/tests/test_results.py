import json

import numpy as np
import pytest

from storagevalue import testnets
from storagevalue.core import Bus, Line
from storagevalue.ingest import MissingFile
from storagevalue.results import (
    NotOptimal,
    extract_nodal_prices,
    extract_results,
    optimize,
    read_results,
    write_results,
)
from storagevalue.solver import solve

from conftest import plain_scenario, solar_night_network


def assert_results_equal(a, b):
    assert (a.network, a.scenario, a.storage_mode, a.status) == (b.network, b.scenario, b.storage_mode, b.status)
    assert a.objective == b.objective
    assert a.timestamps == b.timestamps
    assert np.array_equal(a.weights, b.weights)
    assert a.capacities == b.capacities
    for name in ("dispatch", "available", "flows", "line_capacity", "charge", "discharge", "level", "spill",
                 "prices", "demand"):
        x, y = getattr(a, name), getattr(b, name)
        assert x.keys() == y.keys(), name
        for k in x:
            assert np.array_equal(x[k], y[k]), (name, k)
    assert a.storage_group == b.storage_group and a.degenerate == b.degenerate
    assert (a.co2_price, a.co2_emissions) == (b.co2_price, b.co2_emissions)


def test_write_read_round_trip_is_exact(tmp_path, wind_lull_run):
    res = wind_lull_run.results
    write_results(res, tmp_path / "run")
    back = read_results(tmp_path / "run")
    assert_results_equal(res, back)
    summary = json.loads((tmp_path / "run" / "summary.json").read_text())
    assert summary["objective"] == res.objective
    # a second write produces the same bytes
    write_results(back, tmp_path / "again")
    for f in (tmp_path / "run").iterdir():
        assert f.read_bytes() == (tmp_path / "again" / f.name).read_bytes()


def test_missing_results(tmp_path):
    with pytest.raises(MissingFile):
        read_results(tmp_path / "absent")
    tmp_path.joinpath("empty").mkdir()
    with pytest.raises(MissingFile):
        read_results(tmp_path / "empty")


def test_not_optimal_refuses_tables():
    net = testnets.single_bus()
    _, lp, sol = optimize(net, plain_scenario(co2_cap=1.0))
    assert sol.status == "infeasible"
    with pytest.raises(NotOptimal):
        extract_results(net, plain_scenario(co2_cap=1.0), lp, sol)
    with pytest.raises(NotOptimal):
        extract_nodal_prices(net, lp, sol)


def test_prices_scale_with_weights():
    net = testnets.single_bus()
    snaps = net.snapshots
    heavy = net.replace(snapshots=type(snaps)(snaps.timestamps, np.full(4, 3.0)))
    res, _, _ = optimize(heavy, plain_scenario(co2_cap=np.inf))
    assert np.allclose(res.prices["n1"], 50.0)
    assert res.hours == 12.0


def test_doubling_demand_keeps_marginal_prices():
    net = testnets.single_bus()
    doubled = net.replace(loads={"n1": 2 * net.load("n1")})
    a, _, _ = optimize(net, plain_scenario(co2_cap=np.inf))
    b, _, _ = optimize(doubled, plain_scenario(co2_cap=np.inf))
    assert np.allclose(a.prices["n1"], b.prices["n1"])


def test_degenerate_bus_flag():
    net = testnets.two_bus()
    spur = net.replace(buses=net.buses + (Bus("c", "AA"),),
                       lines=net.lines + (Line("bc", "b", "c", reactance=0.1, existing_capacity=50.0),))
    res, _, _ = optimize(spur, plain_scenario(co2_cap=np.inf))
    assert res.degenerate == {"a": False, "b": False, "c": True}
    assert np.allclose(res.flows["bc"], 0.0)


def test_storage_tables_and_capacity_rows():
    net = solar_night_network()
    scn = plain_scenario()
    lp_res, lp, sol = optimize(net, scn)
    res = extract_results(net, scn, lp, solve(lp))
    assert res.storage_techs() == ["store"]
    assert res.tech_bus("store") == "n1"
    assert {r.component for r in res.storage_rows()} == {"charger", "store", "discharger"}
    row = res.capacity("generator", "solar")
    assert row.expansion == row.optimal and row.renewable
    with pytest.raises(KeyError):
        res.capacity("generator", "nope")
    assert lp_res.objective == pytest.approx(res.objective)
