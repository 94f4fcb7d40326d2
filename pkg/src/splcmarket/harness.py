"""Random instance generation, benchmark statistics, and the brute-force enumerator.

The generator mirrors the benchmark recipe the solver is measured against:
every utility and production function gets the same number of segments, with
slopes/rates drawn uniformly, lengths drawn from [0, 10/#segments], and the
last segment of every function unbounded.  All draws are dyadic rationals with
denominator 2^20, so the whole pipeline stays exact.  Rates stay below 1,
which rules out production cycles at or above product one.

The enumerator solves every complementary support of the unaugmented market
LCP exactly, keeps the nonnegative complementary solutions, verifies each as a
market equilibrium, and deduplicates by normalized prices; its count is the
oddness oracle for small markets.
"""

from __future__ import annotations

import csv
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import analysis
from .equilibrium import (
    Equilibrium,
    InternalSolverError,
    SolveOutcome,
    extract_equilibrium,
    normalize_equilibrium,
    solve_market,
    verify_equilibrium,
)
from .formulation import build_nhad_lcp
from .lcp import DEFAULT_MAX_ITERATIONS, enumerate_complementary_solutions
from .model import (
    Agent,
    Firm,
    Market,
    ProductionSegment,
    UtilitySegment,
    validate_market,
)

__all__ = [
    "GenParams",
    "BenchStats",
    "EnumerationResult",
    "generate_random_market",
    "total_segments",
    "run_benchmark",
    "enumerate_equilibria",
]

DYADIC_BITS = 20
ENUMERATION_DIMENSION_LIMIT = 16


@dataclass(frozen=True)
class GenParams:
    agents: int
    goods: int
    firms: int
    segments: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.agents < 1 or self.goods < 1 or self.segments < 1 or self.firms < 0:
            raise ValueError("agents, goods, segments must be >= 1 and firms >= 0")
        if self.firms > self.goods:
            raise ValueError("firms must not exceed goods (firm a produces good a)")


def total_segments(p: GenParams) -> int:
    return (p.agents * p.goods + p.firms * (p.goods - 1)) * p.segments


def _dyadic(rng: random.Random) -> Fraction:
    return Fraction(rng.getrandbits(DYADIC_BITS), 1 << DYADIC_BITS)


def _positive_dyadic(rng: random.Random) -> Fraction:
    while True:
        value = _dyadic(rng)
        if value > 0:
            return value


def _distinct_positive_dyadics(rng: random.Random, count: int) -> list[Fraction]:
    """Slope/rate draws, sorted strictly decreasing; ties are re-drawn."""
    values: set[Fraction] = set()
    while len(values) < count:
        values.add(_positive_dyadic(rng))
    return sorted(values, reverse=True)


def generate_random_market(p: GenParams) -> Market:
    """Deterministic random market; passes validation and the cycle check.

    Firm a produces good a and consumes every other good.  Each function has
    ``p.segments`` segments: the first ones bounded with drawn lengths, the
    last unbounded (its slope is the smallest draw, so non-satiation holds for
    every (agent, good) and (firm, input) pair, and the agent/firm graph stays
    strongly connected).
    """
    rng = random.Random(p.seed)
    goods = tuple(f"g{i + 1}" for i in range(p.goods))
    agent_names = [f"a{i + 1}" for i in range(p.agents)]
    firm_names = [f"f{i + 1}" for i in range(p.firms)]
    seg_scale = Fraction(10, p.segments)

    raw_endow = {a: {g: _positive_dyadic(rng) for g in goods} for a in agent_names}
    col_sum = {g: sum(raw_endow[a][g] for a in agent_names) for g in goods}
    endowment = {a: {g: raw_endow[a][g] / col_sum[g] for g in goods} for a in agent_names}

    raw_shares = {f: {a: _positive_dyadic(rng) for a in agent_names} for f in firm_names}
    share_sum = {f: sum(raw_shares[f][a] for a in agent_names) for f in firm_names}
    shares = {
        a: {f: raw_shares[f][a] / share_sum[f] for f in firm_names} for a in agent_names
    }

    def splc_segments(kind: str) -> tuple:
        slopes = _distinct_positive_dyadics(rng, p.segments)
        bounds = [_positive_dyadic(rng) * seg_scale for _ in range(p.segments - 1)] + [None]
        if kind == "utility":
            return tuple(UtilitySegment(s, l) for s, l in zip(slopes, bounds))
        return tuple(ProductionSegment(s, l) for s, l in zip(slopes, bounds))

    agents = tuple(
        Agent(
            name=a,
            endowment=endowment[a],
            shares=dict(shares[a]),
            utility={g: splc_segments("utility") for g in goods},
        )
        for a in agent_names
    )
    firms = tuple(
        Firm(
            name=f,
            produces=goods[i],
            inputs={g: splc_segments("production") for g in goods if g != goods[i]},
        )
        for i, f in enumerate(firm_names)
    )
    market = Market(goods=goods, agents=agents, firms=firms)
    report = validate_market(market)
    assert report.ok, f"generator produced an invalid market:\n{report}"
    return market


# ---------------------------------------------------------------------------
# Benchmarks


@dataclass(frozen=True)
class BenchStats:
    instances: int
    total_segments: int
    min_iterations: int
    avg_iterations: Fraction
    max_iterations: int
    secondary_ray_count: int
    failures: int
    outcomes: tuple[tuple[int, int, str], ...] = field(repr=False, default=())
    # outcomes rows: (instance, iterations, outcome label)

    def to_obj(self) -> dict:
        return {
            "instances": self.instances,
            "total_segments": self.total_segments,
            "min_iterations": self.min_iterations,
            "avg_iterations": float(self.avg_iterations),
            "avg_iterations_exact": f"{self.avg_iterations.numerator}/{self.avg_iterations.denominator}",
            "max_iterations": self.max_iterations,
            "secondary_ray_count": self.secondary_ray_count,
            "failures": self.failures,
        }


def instance_seed(base_seed: int, instance: int) -> int:
    return base_seed * 1_000_003 + instance


def _bench_one(args: tuple[GenParams, int, int]) -> tuple[int, int, str]:
    params, instance, max_iterations = args
    market = generate_random_market(replace(params, seed=instance_seed(params.seed, instance)))
    outcome = solve_market(market, max_iterations=max_iterations)
    label = outcome.kind
    if outcome.kind == "failure":
        label = f"failure:{outcome.failure.condition}"
    elif outcome.kind == "equilibrium":
        _, capped = analysis.compute_production_bound(market)
        if not verify_equilibrium(capped, outcome.equilibrium).ok:
            label = "verify-failed"
    return instance, outcome.iterations, label


def run_benchmark(
    params: GenParams,
    count: int,
    *,
    workers: int = 1,
    csv_path: str | None = None,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> BenchStats:
    """Generate, solve, and verify ``count`` instances; aggregate pivot counts.

    Instance i uses seed ``instance_seed(params.seed, i)``, so runs are
    reproducible instance by instance regardless of worker count.
    """
    jobs = [(params, i, max_iterations) for i in range(count)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_one, jobs, chunksize=1))
    else:
        rows = [_bench_one(job) for job in jobs]
    rows.sort()

    iteration_counts = [it for _, it, _ in rows]
    ray_count = sum(1 for _, _, label in rows if label == "ray")
    failures = sum(
        1 for _, _, label in rows if label not in ("equilibrium", "ray")
    )
    stats = BenchStats(
        instances=count,
        total_segments=total_segments(params),
        min_iterations=min(iteration_counts, default=0),
        avg_iterations=Fraction(sum(iteration_counts), count) if count else Fraction(0),
        max_iterations=max(iteration_counts, default=0),
        secondary_ray_count=ray_count,
        failures=failures,
        outcomes=tuple(rows),
    )
    if csv_path:
        with open(csv_path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["instance", "totalSegments", "iterations", "outcome"])
            for instance, iterations, label in rows:
                writer.writerow([instance, stats.total_segments, iterations, label])
    return stats


# ---------------------------------------------------------------------------
# Brute-force enumeration (oddness oracle)


@dataclass(frozen=True)
class EnumerationResult:
    equilibria: tuple[Equilibrium, ...]
    degenerate: bool

    @property
    def count(self) -> int:
        return len(self.equilibria)


def enumerate_equilibria(m: Market, dimension_limit: int = ENUMERATION_DIMENSION_LIMIT) -> EnumerationResult:
    """All equilibria of a small market, up to scaling, by support enumeration.

    Every complementary support of the unaugmented LCP is solved exactly;
    nonnegative complementary solutions are extracted, verified, normalized by
    the first good's price, and deduplicated.  The ``degenerate`` flag reports
    zero-valued support coordinates or duplicate solutions, the situations in
    which the oddness guarantee does not apply.
    """
    report = validate_market(m)
    if not report.ok:
        raise ValueError(f"invalid market:\n{report}")
    _, capped = analysis.compute_production_bound(m)
    floor = analysis.compute_price_floor(capped)
    nhad = build_nhad_lcp(capped, floor)
    size = nhad.instance.n
    if size > dimension_limit:
        raise ValueError(f"LCP dimension {size} exceeds the brute-force bound {dimension_limit}")
    solutions, degenerate = enumerate_complementary_solutions(nhad.instance.matrix, nhad.instance.q)
    by_prices: dict[tuple[Fraction, ...], Equilibrium] = {}
    for y in solutions:
        eq = extract_equilibrium(capped, floor, nhad.index, y)
        check = verify_equilibrium(capped, eq)
        if not check.ok:
            raise InternalSolverError(
                f"support-enumeration solution failed market verification:\n{check}"
            )
        norm = normalize_equilibrium(eq, m.goods[0])
        key = tuple(norm.prices[g] for g in m.goods)
        if key in by_prices:
            degenerate = True
            continue
        by_prices[key] = norm
    return EnumerationResult(equilibria=tuple(by_prices.values()), degenerate=degenerate)


def lemke_prices_in_enumeration(outcome: SolveOutcome, enumeration: EnumerationResult, m: Market) -> bool:
    """Cross-check: the pivot solver's normalized prices appear in the enumerated set."""
    assert outcome.equilibrium is not None
    norm = normalize_equilibrium(outcome.equilibrium, m.goods[0])
    target = tuple(norm.prices[g] for g in m.goods)
    return any(
        tuple(eq.prices[g] for g in m.goods) == target for eq in enumeration.equilibria
    )
