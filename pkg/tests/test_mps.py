import numpy as np
import pytest

from storagevalue import testnets
from storagevalue.formulation import build_problem
from storagevalue.mps import MpsError, format_mps, parse_mps, read_mps, write_mps
from storagevalue.solver import solve

from conftest import plain_scenario, solar_night_network
from oracles import highs_objective, random_lp


def assert_same_program(a, b):
    assert np.array_equal(a.c, b.c)
    assert (a.A != b.A).nnz == 0
    assert np.array_equal(a.rhs, b.rhs) and np.array_equal(a.sense, b.sense)
    assert np.array_equal(a.lower, b.lower) and np.array_equal(a.upper, b.upper)
    assert a.offset == b.offset


@pytest.mark.parametrize("make", [testnets.two_bus, solar_night_network])
def test_round_trip_is_exact(tmp_path, make):
    lp = build_problem(make(), plain_scenario(co2_cap=1e6))
    path = write_mps(lp, tmp_path / "p.mps")
    back = read_mps(path)
    assert_same_program(lp, back)
    assert back.variables.names() == lp.variables.names()
    assert format_mps(back) == path.read_text()


def test_random_programs_round_trip():
    rng = np.random.default_rng(4)
    for _ in range(30):
        lp, _ = random_lp(rng)
        lp.offset = float(rng.integers(-5, 5))
        assert_same_program(lp, parse_mps(format_mps(lp)))


def test_highs_agrees_on_reread_program(tmp_path):
    lp = build_problem(solar_night_network(), plain_scenario())
    back = read_mps(write_mps(lp, tmp_path / "p.mps"))
    ours = solve(lp).objective
    assert highs_objective(back) == pytest.approx(ours, rel=1e-7)


@pytest.mark.parametrize("text", [
    "NAME x\nROWS\n N COST\n L r1\nCOLUMNS\n x1 r9 1\nRHS\nENDATA\n",
    "NAME x\nROWS\n Q r1\nENDATA\n",
    "NAME x\nROWS\n N COST\nCOLUMNS\n x1 COST notanumber\nENDATA\n",
])
def test_malformed_mps(text):
    with pytest.raises(MpsError):
        parse_mps(text)
