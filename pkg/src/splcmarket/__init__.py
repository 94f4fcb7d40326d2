"""Exact-arithmetic equilibrium toolkit for Arrow-Debreu markets with SPLC
utilities and SPLC production: an LCP formulation solved by complementary
pivoting, an independent verifier, sufficiency checks, an exchange-to-
production reduction, and a benchmark harness."""

from .analysis import (
    CheckReport,
    PriceFloor,
    check_enough_demand,
    check_no_production_out_of_nothing,
    check_strong_connectivity,
    compute_price_floor,
    compute_production_bound,
    run_all_checks,
)
from .equilibrium import (
    Equilibrium,
    SecondaryRayReport,
    SolveOutcome,
    VerificationReport,
    normalize_equilibrium,
    parse_equilibrium,
    restrict_market,
    scale_equilibrium,
    serialize_equilibrium,
    solve_market,
    verify_equilibrium,
)
from .formulation import NhadLcp, VariableIndex, build_nhad_lcp, index_variables
from .harness import (
    BenchStats,
    GenParams,
    enumerate_equilibria,
    generate_random_market,
    run_benchmark,
)
from .lcp import (
    LcpInstance,
    SecondaryRay,
    Solution,
    lemke_solve,
    verify_lcp_solution,
)
from .model import (
    Agent,
    Firm,
    Market,
    ProductionSegment,
    UtilitySegment,
    parse_market,
    serialize_market,
    validate_market,
)
from .reduction import exchange_to_production, lift_exchange_equilibrium, project_equilibrium

__version__ = "0.1.0"
