"""Command-line front end: validate, solve, analyse and compare runs.

Exit codes: 0 success, 2 validation failure, 3 infeasible/unbounded (or
iteration limit), 4 I/O, 5 internal.  Failures print one line to stderr of
the form ``ERROR <ClassName>: <message>``.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .analysis import (
    STORAGE_KINDS,
    LcosAssumptions,
    dcf_lcos,
    evaluate_criteria,
    kpis,
    market_potential,
    modelled_lcos_table,
    mpi_summary,
    roundtrip_efficiency,
    static_lcos,
    whole_system_benefit,
)
from .core import validate_network
from .formulation import EmptySnapshots, HubMembersAcrossBuses, build_problem, problem_manifest
from .ingest import (
    IngestError,
    MalformedKey,
    MalformedRow,
    MissingFile,
    NotDivisible,
    OutOfRange,
    ValidationFailed,
    format_scenario,
    parse_network_bundle,
    parse_scenario,
    read_network_bundle,
    resample_snapshots,
)
from .lp import InfeasibleBounds
from .mps import write_mps
from .results import extract_results, read_results, write_results
from .solver import solve, verify_kkt
from .techdata import LCOS_INPUTS

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_IO, EXIT_INTERNAL = 0, 2, 3, 4, 5


class CliError(Exception):
    code = EXIT_INTERNAL


class SolverFailure(CliError):
    code = EXIT_SOLVER


class CertificateFailed(CliError):
    code = EXIT_INTERNAL


# ----------------------------------------------------------------- manifest
def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def input_digests(paths) -> dict:
    """sha256 of every input file; bundle directories are expanded."""
    out = {}
    for p in paths:
        p = Path(p)
        files = sorted(f for f in p.iterdir() if f.is_file()) if p.is_dir() else [p]
        for f in files:
            out[str(f)] = file_digest(f)
    return out


@dataclass
class RunManifest:
    bundle: str
    scenarios: list
    output: str
    version: str = __version__
    digests: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))

    def verify(self) -> list:
        """Inputs whose current digest differs from the recorded one."""
        bad = []
        for path, digest in sorted(self.digests.items()):
            if not Path(path).exists() or file_digest(Path(path)) != digest:
                bad.append(path)
        return bad


def read_manifest(directory) -> RunManifest:
    path = Path(directory) / "manifest.json"
    if not path.exists():
        raise MissingFile(str(path))
    return RunManifest.from_json(path.read_text(encoding="utf-8"))


# ------------------------------------------------------------------ helpers
def _atomic_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _emit(text: str, out_dir, name: str) -> None:
    if out_dir:
        _atomic_text(Path(out_dir) / name, text)
    else:
        sys.stdout.write(text)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ----------------------------------------------------------------- commands
def cmd_validate(args) -> int:
    network = read_network_bundle(args.bundle)
    report = validate_network(network)
    print(report)
    return EXIT_OK if report.ok else EXIT_VALIDATION


def _load_run_inputs(args):
    network = parse_network_bundle(args.bundle)
    scenario = parse_scenario(args.scenario)
    if getattr(args, "resample", None):
        network = resample_snapshots(network, args.resample)
    changes = {}
    if getattr(args, "epsilon_cost", None) is not None:
        changes["epsilon_cost"] = args.epsilon_cost
    if getattr(args, "max_iter", None) is not None:
        changes["max_iterations"] = args.max_iter
    if changes:
        scenario = scenario.with_options(**changes)
    return network, scenario


def cmd_solve(args) -> int:
    timings = {}
    t0 = time.perf_counter()
    network, scenario = _load_run_inputs(args)
    timings["ingest"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    lp = build_problem(network, scenario)
    timings["formulate"] = time.perf_counter() - t0
    solution = solve(lp, scenario.solver_options())
    timings["solve"] = solution.solve_seconds
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        bundle=str(args.bundle),
        scenarios=[str(args.scenario)],
        output=str(out),
        digests=input_digests([args.bundle, args.scenario]),
        timings=timings,
    )
    if not solution.optimal:
        _atomic_text(out / "manifest.json", manifest.to_json())
        raise SolverFailure(f"solver status {solution.status}")
    t0 = time.perf_counter()
    results = extract_results(network, scenario, lp, solution)
    cert = verify_kkt(lp, solution, tol=args.tol)
    write_results(results, out)
    _atomic_text(out / "scenario.cfg", format_scenario(scenario))
    _atomic_text(out / "kkt.txt", "\n".join(cert.lines()) + "\n")
    _atomic_text(out / "problem.json", _json(problem_manifest(lp)))
    timings["write"] = time.perf_counter() - t0
    _atomic_text(out / "manifest.json", manifest.to_json())
    print(f"status={solution.status} objective={solution.objective!r} iterations={solution.iterations} "
          f"kkt={'PASS' if cert.passed else 'FAIL'}")
    if not cert.passed:
        raise CertificateFailed(f"KKT certificate failed at tol {args.tol:g}")
    return EXIT_OK


def cmd_export_lp(args) -> int:
    network, scenario = _load_run_inputs(args)
    lp = build_problem(network, scenario)
    write_mps(lp, args.out, name=(network.name or "network").replace(" ", "_"))
    print(f"wrote {args.out} rows={lp.n_rows} cols={lp.n_vars}")
    return EXIT_OK


LCOS_COLUMNS = ("tech", "bus", "lcos_eur_per_kwh", "full_load_hours", "ep_ratio_hours", "discharged_mwh",
                "mean_charge_price", "market_potential_mw", "reported")


def cmd_lcos(args) -> int:
    if args.static or not args.run:
        rows = []
        for name, spec in LCOS_INPUTS.items():
            a = LcosAssumptions.from_components(
                spec["components"],
                discharge_ratio_hours=spec["discharge_ratio_hours"],
                electricity_price=spec["electricity_price"],
                full_load_hours=spec["full_load_hours"],
            )
            rows.append((name, static_lcos(a), dcf_lcos(a), roundtrip_efficiency(a)))
        _emit(_csv(("tech", "static_lcos_eur_per_kwh", "dcf_lcos_eur_per_kwh", "roundtrip_efficiency"), rows),
              args.out, "lcos_static.csv")
        return EXIT_OK
    res = read_results(args.run)
    table = modelled_lcos_table(res, min_mpi_mw=args.min_mpi, min_flh=args.min_flh)
    rows = [(m.tech, m.bus, m.lcos, m.full_load_hours, m.ep_ratio, m.discharged_mwh, m.mean_charge_price,
             m.market_potential, m.reported) for m in table if m.reported or args.all]
    _emit(_csv(LCOS_COLUMNS, rows), args.out, "lcos.csv")
    return EXIT_OK


def cmd_mpi(args) -> int:
    res = read_results(args.run)
    regions = args.regions.split(",") if args.regions else None
    rows = []
    for kind in STORAGE_KINDS:
        table = market_potential(res, kind, regions)
        rows += [(r.component, r.kind, r.bus, r.entity, r.mpi) for r in table.rows]
    _emit(_csv(("component", "kind", "bus", "entity", "mpi"), rows), args.out, "mpi.csv")
    return EXIT_OK


def cmd_kpi(args) -> int:
    res = read_results(args.run)
    report = kpis(res).as_dict()
    report["scenario"] = res.scenario
    _emit(_json(report), args.out, "kpi.json")
    return EXIT_OK


def cmd_wsb(args) -> int:
    without, with_ = read_results(args.without), read_results(args.with_)
    techs = args.techs.split(",") if args.techs else None
    b = whole_system_benefit(without, with_, techs)
    _emit(_json({"net": b.net, "gross": b.gross, "storage_capital": b.storage_capital,
                 "without": without.scenario, "with": with_.scenario}), args.out, "wsb.json")
    return EXIT_OK


def cmd_compare(args) -> int:
    runs = [read_results(d) for d in args.runs]
    tables = {}
    for d, res in zip(args.runs, runs):
        name = res.scenario or Path(d).name
        if name in tables:
            name = f"{name}@{Path(d).name}"
        tables[name] = mpi_summary(res)
    pairs = [tuple(p.split(",", 1)) for p in (args.pair or [])]
    verdicts = evaluate_criteria(tables, threshold=args.threshold_mw, comparisons=pairs)
    rows = [(scen, comp, value) for scen, table in tables.items() for comp, value in table.items()]
    mpi_text = _csv(("scenario", "component", "mpi"), rows)
    crit_rows = [(v.component, v.verdict, v.threshold_pass, max(v.mpi.values()),
                  ";".join(f"{k}:{r}" for k, r in sorted(v.ranking.items()))) for v in verdicts]
    crit_text = _csv(("component", "verdict", "threshold_pass", "max_mpi", "ranking"), crit_rows)
    if args.out:
        _atomic_text(Path(args.out) / "mpi_compare.csv", mpi_text)
        _atomic_text(Path(args.out) / "criteria.csv", crit_text)
    else:
        sys.stdout.write(mpi_text + "\n" + crit_text)
    return EXIT_OK


# ------------------------------------------------------------------- parser
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="storagevalue", description="Storage valuation on capacity-expansion runs.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a network bundle")
    s.add_argument("bundle")
    s.set_defaults(func=cmd_validate)

    def run_inputs(sp):
        sp.add_argument("bundle")
        sp.add_argument("scenario")
        sp.add_argument("--resample", type=int, metavar="N", help="aggregate N consecutive snapshots")
        sp.add_argument("--epsilon-cost", type=float, help="override the dispatch epsilon cost")
        sp.add_argument("--max-iter", type=int, help="simplex iteration limit")

    s = sub.add_parser("solve", help="optimise a bundle under a scenario")
    run_inputs(s)
    s.add_argument("-o", "--out", required=True, help="output run directory")
    s.add_argument("--tol", type=float, default=1e-6, help="KKT certificate tolerance")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("export-lp", help="write the LP in free MPS format")
    run_inputs(s)
    s.add_argument("-o", "--out", required=True, help="output .mps file")
    s.set_defaults(func=cmd_export_lp)

    def filters(sp):
        sp.add_argument("--threshold-mw", type=float, default=1000.0, help="market-size threshold")
        sp.add_argument("--min-flh", type=float, default=80.0, help="report filter on full-load hours")
        sp.add_argument("--min-mpi", type=float, default=1.0, help="report filter on market potential [MW]")
        sp.add_argument("-o", "--out", help="write into this directory instead of stdout")

    s = sub.add_parser("lcos", help="modelled LCOS of a run, or static LCOS with --static")
    s.add_argument("run", nargs="?")
    s.add_argument("--static", action="store_true", help="static LCOS from the built-in cost data")
    s.add_argument("--all", action="store_true", help="include filtered rows")
    filters(s)
    s.set_defaults(func=cmd_lcos)

    s = sub.add_parser("mpi", help="market potential per component and bus")
    s.add_argument("run")
    s.add_argument("--regions", help="comma-separated bus ids")
    filters(s)
    s.set_defaults(func=cmd_mpi)

    s = sub.add_parser("kpi", help="system KPIs of a run")
    s.add_argument("run")
    filters(s)
    s.set_defaults(func=cmd_kpi)

    s = sub.add_parser("wsb", help="whole-system benefit between two runs")
    s.add_argument("without")
    s.add_argument("with_", metavar="with")
    s.add_argument("--techs", help="comma-separated ids of the added storage")
    filters(s)
    s.set_defaults(func=cmd_wsb)

    s = sub.add_parser("compare", help="MPI table and criteria verdicts across runs")
    s.add_argument("runs", nargs="+")
    s.add_argument("--pair", action="append", metavar="A,B", help="rank component A against B")
    filters(s)
    s.set_defaults(func=cmd_compare)
    return p


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, CliError):
        return exc.code
    if isinstance(exc, (ValidationFailed, MalformedRow, MalformedKey, OutOfRange, EmptySnapshots,
                        HubMembersAcrossBuses, InfeasibleBounds, NotDivisible)):
        return EXIT_VALIDATION
    if isinstance(exc, (MissingFile, OSError)):
        return EXIT_IO
    if isinstance(exc, IngestError):
        return EXIT_VALIDATION
    return EXIT_INTERNAL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # every failure becomes one parseable line
        message = " ".join(str(exc).split()) or type(exc).__name__
        print(f"ERROR {type(exc).__name__}: {message}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
