"""Capacity-expansion LP with storage valuation.

Typical use::

    from storagevalue import parse_network_bundle, parse_scenario, optimize, kpis
    net = parse_network_bundle("fixtures/five-bus")
    res, lp, sol = optimize(net, parse_scenario("scenarios/fixed_ep.cfg"))
    print(kpis(res).relative_investment)
"""
__version__ = "0.1.0"

from .analysis import (  # noqa: E402
    LcosAssumptions,
    evaluate_criteria,
    kpis,
    market_potential,
    modelled_lcos,
    static_lcos,
    whole_system_benefit,
)
from .core import Network, annualized_cost, annuity_factor, validate_network  # noqa: E402
from .formulation import build_problem  # noqa: E402
from .ingest import ScenarioConfig, parse_network_bundle, parse_scenario  # noqa: E402
from .results import ModelResults, extract_nodal_prices, optimize, read_results, write_results  # noqa: E402
from .solver import SolverOptions, solve, verify_kkt  # noqa: E402

__all__ = [
    "LcosAssumptions", "ModelResults", "Network", "ScenarioConfig", "SolverOptions",
    "annualized_cost", "annuity_factor", "build_problem", "evaluate_criteria", "extract_nodal_prices",
    "kpis", "market_potential", "modelled_lcos", "optimize", "parse_network_bundle", "parse_scenario",
    "read_results", "solve", "static_lcos", "validate_network", "verify_kkt", "whole_system_benefit",
    "write_results",
]
