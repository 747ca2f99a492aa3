import csv
import io
import json
import shutil
import subprocess
import sys

import pytest

from storagevalue import testnets
from storagevalue.cli import RunManifest, input_digests, main, read_manifest
from storagevalue.mps import read_mps

from conftest import FIXTURES

WIND_LULL = str(FIXTURES / "wind-lull")
FIXED_EP = str(testnets.scenario_path("fixed_ep"))
VARIABLE_EP = str(testnets.scenario_path("variable_ep"))
RESULT_FILES = ("capacities.csv", "dispatch.csv", "prices.csv", "flows.csv", "storage.csv", "summary.json",
                "kkt.txt", "manifest.json", "problem.json", "scenario.cfg")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    for name, scn in (("fixed", FIXED_EP), ("variable", VARIABLE_EP)):
        assert main(["solve", WIND_LULL, scn, "-o", str(root / name)]) == 0
    return root


def test_validate_exit_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "validate", FIXTURES / "five-bus")
    assert code == 0
    shutil.copytree(FIXTURES / "two-bus", tmp_path / "b")
    path = tmp_path / "b" / "lines.csv"
    path.write_text(path.read_text().replace(",0.1,", ",-0.1,"))
    code, out, _ = run(capsys, "validate", tmp_path / "b")
    assert code == 2 and "reactance must be > 0" in out
    code, _, err = run(capsys, "validate", tmp_path / "absent")
    assert code == 4 and err.startswith("ERROR MissingFile:")
    assert len(err.strip().splitlines()) == 1


def test_solve_writes_every_table(solved):
    for name in RESULT_FILES:
        assert (solved / "fixed" / name).exists(), name
    assert (solved / "fixed" / "kkt.txt").read_text().startswith("status=PASS")
    assert not list((solved / "fixed").glob("*.tmp"))
    manifest = read_manifest(solved / "fixed")
    assert manifest.verify() == []
    assert set(manifest.timings) >= {"ingest", "formulate", "solve", "write"}
    assert RunManifest.from_json(manifest.to_json()) == manifest


def test_manifest_detects_changed_inputs(tmp_path):
    bundle = tmp_path / "bundle"
    shutil.copytree(FIXTURES / "single-bus", bundle)
    manifest = RunManifest(str(bundle), [], str(tmp_path))
    manifest.digests = input_digests([bundle])
    assert manifest.verify() == []
    with open(bundle / "loads.csv", "a") as fh:
        fh.write("\n")
    assert manifest.verify() == [str(bundle / "loads.csv")]


def test_reruns_are_byte_identical(tmp_path, solved):
    assert main(["solve", WIND_LULL, FIXED_EP, "-o", str(tmp_path / "again")]) == 0
    for name in RESULT_FILES:
        if name == "manifest.json":
            continue
        assert (tmp_path / "again" / name).read_bytes() == (solved / "fixed" / name).read_bytes(), name
    for cmd in (["kpi"], ["mpi"], ["lcos", "--all"]):
        a = tmp_path / "a" / cmd[0]
        b = tmp_path / "b" / cmd[0]
        assert main(cmd[:1] + [str(solved / "fixed")] + cmd[1:] + ["-o", str(a)]) == 0
        assert main(cmd[:1] + [str(tmp_path / "again")] + cmd[1:] + ["-o", str(b)]) == 0
        for f in a.iterdir():
            assert f.read_bytes() == (b / f.name).read_bytes()


def test_kpi_and_relaxation_ordering(capsys, solved):
    _, fixed, _ = run(capsys, "kpi", solved / "fixed")
    _, variable, _ = run(capsys, "kpi", solved / "variable")
    fixed, variable = json.loads(fixed), json.loads(variable)
    assert fixed["total_system_cost"] >= variable["total_system_cost"] * (1 - 1e-6)
    assert fixed["scenario"] == "fixed_ep" and fixed["co2_emissions"] == 0.0


def test_mpi_lcos_and_wsb(capsys, solved):
    code, out, _ = run(capsys, "mpi", solved / "fixed", "--regions", "w1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 6
    by = {r["component"]: float(r["mpi"]) for r in rows}
    assert by["h2_high:discharger"] > 0 and by["h2_low:discharger"] < 1
    code, out, _ = run(capsys, "lcos", "--static")
    rows = {r["tech"]: r for r in csv.DictReader(io.StringIO(out))}
    assert float(rows["battery"]["roundtrip_efficiency"]) == pytest.approx(0.81)
    code, out, _ = run(capsys, "lcos", solved / "fixed")
    assert [r["tech"] for r in csv.DictReader(io.StringIO(out))] == ["h2_high"]
    code, out, _ = run(capsys, "wsb", solved / "fixed", solved / "variable")
    assert code == 0 and json.loads(out)["net"] >= -1e-6


def test_compare_layout(capsys, solved, tmp_path):
    code, _, _ = run(capsys, "compare", solved / "fixed", solved / "variable", "--pair",
                     "h2_high:discharger,h2_low:discharger", "-o", tmp_path)
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "mpi_compare.csv")))
    components = {r["component"] for r in rows}
    assert len(rows) == 2 * len(components)
    crit = {r["component"]: r for r in csv.DictReader(open(tmp_path / "criteria.csv"))}
    assert crit["h2_high:discharger"]["ranking"] == "h2_low:discharger:above"
    assert crit["h2_high:discharger"]["verdict"] == "valuable"


def test_export_lp(capsys, tmp_path):
    code, out, _ = run(capsys, "export-lp", FIXTURES / "single-bus", FIXED_EP, "-o", tmp_path / "p.mps")
    assert code == 0 and out.startswith("wrote")
    lp = read_mps(tmp_path / "p.mps")
    assert ("co2", "total", -1) in lp.constraints


def test_error_classes_and_codes(capsys, tmp_path):
    # zero CO2 cap on a gas-only system is infeasible
    code, _, err = run(capsys, "solve", FIXTURES / "single-bus", FIXED_EP, "-o", tmp_path / "x")
    assert code == 3 and err.startswith("ERROR SolverFailure:")
    assert (tmp_path / "x" / "manifest.json").exists()
    bad = tmp_path / "bad.cfg"
    bad.write_text("storage_mode = sometimes\n")
    code, _, err = run(capsys, "solve", WIND_LULL, bad, "-o", tmp_path / "y")
    assert code == 2 and err.startswith("ERROR OutOfRange:")
    code, _, err = run(capsys, "solve", WIND_LULL, FIXED_EP, "--resample", "5", "-o", tmp_path / "z")
    assert code == 2 and err.startswith("ERROR NotDivisible:")
    code, _, err = run(capsys, "kpi", tmp_path / "nowhere")
    assert code == 4
    code, _, err = run(capsys, "solve", WIND_LULL, FIXED_EP, "--max-iter", "3", "-o", tmp_path / "w")
    assert code == 3 and "iteration_limit" in err


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "storagevalue.cli", "validate", str(FIXTURES / "wind-lull")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    proc = subprocess.run([sys.executable, "-m", "storagevalue.cli", "--version"], capture_output=True, text=True)
    assert proc.stdout.strip() == "0.1.0"
