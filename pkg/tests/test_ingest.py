import filecmp
import math
import shutil

import numpy as np
import pytest

from storagevalue import testnets
from storagevalue.ingest import (
    MalformedKey,
    MalformedRow,
    MissingFile,
    NotDivisible,
    OutOfRange,
    ScenarioConfig,
    ValidationFailed,
    format_scenario,
    networks_equal,
    parse_network_bundle,
    parse_scenario,
    parse_scenario_text,
    read_network_bundle,
    resample_snapshots,
    write_network_bundle,
)

from conftest import FIXTURES


@pytest.mark.parametrize("name", sorted(testnets.NETWORKS))
def test_bundle_round_trip(tmp_path, name):
    net = testnets.NETWORKS[name]()
    write_network_bundle(net, tmp_path / name)
    back = parse_network_bundle(tmp_path / name)
    assert networks_equal(net, back)


def test_committed_fixtures_regenerate_byte_for_byte(tmp_path):
    testnets.write_fixtures(tmp_path)
    cmp = filecmp.dircmp(tmp_path, FIXTURES)
    stack = [cmp]
    while stack:
        c = stack.pop()
        assert not c.left_only and not c.right_only, (c.left_only, c.right_only)
        _, mismatch, errors = filecmp.cmpfiles(c.left, c.right, c.common_files, shallow=False)
        assert not mismatch and not errors, mismatch
        stack.extend(c.subdirs.values())


def test_missing_bundle_and_file(tmp_path):
    with pytest.raises(MissingFile):
        parse_network_bundle(tmp_path / "nope")
    shutil.copytree(FIXTURES / "two-bus", tmp_path / "b")
    (tmp_path / "b" / "lines.csv").unlink()
    with pytest.raises(MissingFile) as info:
        parse_network_bundle(tmp_path / "b")
    assert info.value.name == "lines.csv"


def test_malformed_row_is_located(tmp_path):
    shutil.copytree(FIXTURES / "two-bus", tmp_path / "b")
    path = tmp_path / "b" / "generators.csv"
    lines = path.read_text().splitlines()
    fields = lines[2].split(",")
    fields[3] = "lots"
    lines[2] = ",".join(fields)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(MalformedRow) as info:
        parse_network_bundle(tmp_path / "b")
    assert (info.value.file, info.value.line, info.value.column) == ("generators.csv", 3, "existing_capacity")


def test_invalid_bundle_raises_validation_failed(tmp_path):
    shutil.copytree(FIXTURES / "two-bus", tmp_path / "b")
    path = tmp_path / "b" / "lines.csv"
    path.write_text(path.read_text().replace(",0.1,", ",-0.1,"))
    assert not read_network_bundle(tmp_path / "b").lines[0].reactance > 0
    with pytest.raises(ValidationFailed) as info:
        parse_network_bundle(tmp_path / "b")
    assert any(v.rule == "reactance must be > 0" for v in info.value.report.violations)


def test_scenario_round_trip_and_defaults():
    cfg = parse_scenario_text("storage_mode = h2_hub  # shared stores\nco2_cap = 0\nepsilon_cost = none\n")
    assert cfg.storage_mode == "h2_hub" and cfg.co2_cap == 0 and cfg.epsilon_cost is None
    assert cfg.equity_fraction == 0.8 and cfg.line_volume_expansion_frac == 0.25
    assert parse_scenario_text(format_scenario(cfg)) == cfg
    assert math.isinf(parse_scenario_text("co2_cap = inf").co2_cap)


@pytest.mark.parametrize("text,exc", [
    ("colour = blue", MalformedKey),
    ("co2_cap = 1\nco2_cap = 2", MalformedKey),
    ("co2_cap = lots", MalformedKey),
    ("no equals sign", MalformedKey),
    ("storage_mode = sometimes", OutOfRange),
    ("equity_fraction = 1.5", OutOfRange),
    ("co2_cap = -1", OutOfRange),
])
def test_scenario_errors(text, exc):
    with pytest.raises(exc):
        parse_scenario_text(text)


def test_committed_scenarios():
    for mode in ("fixed_ep", "variable_ep", "h2_hub"):
        cfg = parse_scenario(testnets.scenario_path(mode))
        assert cfg == testnets.SCENARIOS[mode]
        assert cfg.co2_cap == 0
    with pytest.raises(MissingFile):
        parse_scenario(FIXTURES / "scenarios" / "absent.cfg")
    with pytest.raises(OutOfRange):
        ScenarioConfig(max_iterations=0)


def test_resample_preserves_energy():
    net = testnets.five_bus()
    coarse = resample_snapshots(net, 4)
    assert len(coarse.snapshots) == 42
    assert coarse.snapshots.total_hours == net.snapshots.total_hours
    for bus in net.loads:
        assert coarse.snapshots.weights @ coarse.load(bus) == pytest.approx(net.snapshots.weights @ net.load(bus))
    gen = net.generators[0]
    assert coarse.generators[0].availability.shape == (42,)
    assert np.all(coarse.generators[0].availability <= 1.0)
    assert resample_snapshots(net, 1) is net
    with pytest.raises(NotDivisible):
        resample_snapshots(net, 5)
    assert gen.availability.mean() == pytest.approx(coarse.generators[0].availability.mean())
