import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from storagevalue import testnets
from storagevalue.core import (
    Bus,
    Carrier,
    Generator,
    Line,
    Network,
    StorageComponentSpec,
    StorageTech,
    annualized_cost,
    annuity_factor,
    validate_network,
)
from storagevalue.techdata import ELECTROLYSER_LOW, H2_TANK

from conftest import hours, lossless_storage


def rules(network):
    return {(v.entity, v.rule) for v in validate_network(network).violations}


def base_network(**changes):
    net = Network(
        buses=(Bus("a", "AA"), Bus("b", "AA")),
        lines=(Line("ab", "a", "b", reactance=0.1, existing_capacity=10.0),),
        generators=(Generator("g", "a", "gas", existing_capacity=50.0, marginal_cost=30.0),),
        storage=(),
        carriers=(Carrier("gas", 0.3),),
        snapshots=hours(3),
        loads={"b": np.array([5.0, 6.0, 7.0])},
    )
    return net.replace(**changes)


def test_annuity_factor_reference_values():
    # 0.07 * 1.07**25 / (1.07**25 - 1)
    assert annuity_factor(0.07, 25) == pytest.approx(0.0858105172, rel=1e-9)
    assert annuity_factor(0.0, 20) == pytest.approx(1 / 20)


@pytest.mark.parametrize("rate,lifetime", [(-0.01, 10), (0.07, 0.5), (math.nan, 10), (0.07, math.inf)])
def test_annuity_factor_rejects_bad_input(rate, lifetime):
    with pytest.raises(ValueError):
        annuity_factor(rate, lifetime)


@given(st.floats(0.001, 0.2), st.integers(1, 60))
def test_annuity_repays_investment(rate, lifetime):
    # present value of the annuity equals the investment
    af = annuity_factor(rate, lifetime)
    pv = sum(af / (1 + rate) ** t for t in range(1, lifetime + 1))
    assert pv == pytest.approx(1.0, rel=1e-9)


def test_annualized_cost_electrolyser_and_tank():
    assert annualized_cost(ELECTROLYSER_LOW) == pytest.approx(339 * 0.0858105172 + 339 * 0.02, rel=1e-9)
    assert annualized_cost(H2_TANK) == pytest.approx(0.7929006, rel=1e-6)


def test_fixtures_are_valid():
    for make in testnets.NETWORKS.values():
        report = validate_network(make())
        assert report.ok, str(report)


def test_validation_collects_every_problem():
    net = base_network(
        generators=(Generator("g", "zz", "coal", existing_capacity=5.0, availability=np.array([0.5, 1.2, 0.1])),),
        lines=(Line("ab", "a", "b", reactance=0.0),),
    )
    found = rules(net)
    assert ("g", "unknown bus") in found
    assert ("g", "unknown carrier") in found
    assert ("g", "availability out of [0.0,1.0]") in found
    assert ("ab", "reactance must be > 0") in found
    assert ("a", "connected component with load but no generator") in found


def test_duplicate_ids_and_bad_weights():
    net = base_network(buses=(Bus("a", "AA"), Bus("a", "AA"), Bus("b", "AA")))
    assert ("a", "duplicate bus id") in rules(net)
    snaps = hours(3)
    bad = type(snaps)(snaps.timestamps, np.array([1.0, 0.0, 1.0]))
    assert ("snapshots", "weights must be > 0") in rules(base_network(snapshots=bad))


def test_storage_rules():
    bad_eff = StorageComponentSpec("charger", 10.0, 0.0, 10, 1.5)
    tech = StorageTech("s", "a", bad_eff, H2_TANK, StorageComponentSpec("discharger", 1.0, 0, 10, 0.5),
                       coupling="hub_member")
    found = rules(base_network(storage=(tech,)))
    assert ("s.charger", "efficiency out of (0,1]") in found
    assert ("s", "hub_id present iff coupling is hub_member") in found


def test_hub_across_buses_rejected():
    techs = (
        lossless_storage("s1", "a", coupling="hub_member", hub_id="H"),
        lossless_storage("s2", "b", coupling="hub_member", hub_id="H"),
    )
    assert ("H", "hub members across buses") in rules(base_network(storage=techs))


def test_network_arrays_are_read_only():
    net = base_network()
    with pytest.raises(ValueError):
        net.loads["b"][0] = 1.0
    assert np.all(net.load("a") == 0)
    assert net.load_matrix().shape == (2, 3)
