"""End-to-end solve pipeline, equilibrium extraction, and the independent verifier.

The pipeline: validate, run the sufficiency checks, cap unbounded segments,
compute the price floor, build the LCP, run the pivot solver, extract market
quantities.  When the enough-demand condition was waived and the path ends on
a secondary ray whose cheap-goods set touches no non-satiated agent, the
market is restricted (cheap goods and their producers removed, cross
production converted to endowment credits) and re-solved; the reduced
equilibrium is then lifted back with the cheap goods priced at zero.

The verifier shares no code with the formulation: it re-derives optimal
production plans greedily from per-segment profits, re-derives optimal
bundles from the bang-per-buck partition, and checks clearing per good, all
in exact arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

from . import analysis
from .analysis import CheckReport, PriceFloor, PreconditionError
from .formulation import DecodedPoint, NhadLcp, SegKey, VariableIndex, build_nhad_lcp
from .lcp import (
    DEFAULT_MAX_ITERATIONS,
    IterationLimit,
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
    rational_from_str,
    rational_to_str,
    validate_market,
)

__all__ = [
    "Equilibrium",
    "SecondaryRayReport",
    "SolveOutcome",
    "VerificationReport",
    "InvalidMarketError",
    "InternalSolverError",
    "solve_market",
    "extract_equilibrium",
    "verify_equilibrium",
    "classify_ray",
    "restrict_market",
    "scale_equilibrium",
    "normalize_equilibrium",
    "serialize_equilibrium",
    "parse_equilibrium",
]


class InvalidMarketError(ValueError):
    """The market fails structural validation (solver precondition)."""


class InternalSolverError(RuntimeError):
    """A state the no-secondary-ray theorem rules out was reached; this is a bug."""


@dataclass(frozen=True)
class Equilibrium:
    """Prices plus per-segment allocations, production plans, and firm profits.

    Prices are strictly positive on the ordinary path; the enough-demand
    fallback may price removed goods at exactly zero.  ``zero_floor_goods``
    records which goods sat on the price floor at the solution vertex (the
    scale the solver pinned).
    """

    prices: dict[str, Fraction]
    agent_alloc: dict[SegKey, Fraction]
    firm_raw: dict[SegKey, Fraction]
    firm_out: dict[SegKey, Fraction]
    profits: dict[str, Fraction]
    zero_floor_goods: tuple[str, ...] = ()


@dataclass(frozen=True)
class SecondaryRayReport:
    """A secondary ray, classified by the zero pattern of its price direction.

    ``s_goods`` are the goods whose prices stay constant along the ray;
    ``f_firms`` produce those goods; ``a1_agents`` are agents non-satiated by
    some good in ``s_goods``.  Classification: "a1-empty" (fallback applies),
    "a1-all", "a1-proper", or "degenerate" (zero pattern empty or full).
    """

    s_goods: tuple[str, ...]
    f_firms: tuple[str, ...]
    a1_agents: tuple[str, ...]
    classification: str
    vertex: DecodedPoint
    direction: DecodedPoint
    vertex_z: Fraction
    direction_z: Fraction


@dataclass(frozen=True)
class SolveOutcome:
    """Structured result of a solve: exactly one of the four kinds."""

    equilibrium: Equilibrium | None = None
    ray: SecondaryRayReport | None = None
    failure: CheckReport | None = None
    limit_hit: bool = False
    iterations: int = 0
    restarts: int = 0

    @property
    def kind(self) -> str:
        if self.equilibrium is not None:
            return "equilibrium"
        if self.ray is not None:
            return "ray"
        if self.failure is not None:
            return "failure"
        return "limit"


@dataclass(frozen=True)
class VerificationViolation:
    clause: str
    entity: str
    message: str


@dataclass(frozen=True)
class VerificationReport:
    violations: tuple[VerificationViolation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"{v.clause} [{v.entity}]: {v.message}" for v in self.violations)


# ---------------------------------------------------------------------------
# Extraction


def extract_equilibrium(
    m: Market, floor: PriceFloor, index: VariableIndex, y: tuple[Fraction, ...]
) -> Equilibrium:
    """Read market quantities off an LCP solution with z = 0.

    Money variables divide by prices to give amounts; division is safe because
    every price is at least its floor, which exceeds 1.
    """
    point = index.decode(y)
    prices = {g: point.p_prime[g] + floor.prices[g] for g in index.goods}
    for g, p in prices.items():
        assert p > 1, f"price of {g} fell below its floor"
    firm_by_name = {f.name: f for f in m.firms}
    agent_alloc = {key: point.q[key] / prices[key[1]] for key in index.utility_segments}
    firm_raw = {key: point.r[key] / prices[key[1]] for key in index.production_segments}
    firm_out: dict[SegKey, Fraction] = {}
    seg_rate = {(f, g, k): seg.rate for f, g, k, seg in m.production_segments()}
    for key in index.production_segments:
        firm_out[key] = seg_rate[key] * firm_raw[key]
    profits: dict[str, Fraction] = {f.name: Fraction(0) for f in m.firms}
    seg_limit = {(f, g, k): seg.limit for f, g, k, seg in m.production_segments()}
    for key in index.production_segments:
        profits[key[0]] += seg_limit[key] * point.beta[key]
    zero_floor = tuple(g for g in index.goods if point.p_prime[g] == 0)
    return Equilibrium(
        prices=prices,
        agent_alloc=agent_alloc,
        firm_raw=firm_raw,
        firm_out=firm_out,
        profits=profits,
        zero_floor_goods=zero_floor,
    )


def scale_equilibrium(e: Equilibrium, factor: Fraction) -> Equilibrium:
    """Rescale the money unit: prices and profits scale, amounts do not."""
    assert factor > 0
    return replace(
        e,
        prices={g: p * factor for g, p in e.prices.items()},
        profits={f: v * factor for f, v in e.profits.items()},
    )


def normalize_equilibrium(e: Equilibrium, numeraire: str | None = None) -> Equilibrium:
    """Scale so the numeraire good (default: first good with positive price) costs 1."""
    if numeraire is None:
        numeraire = next(g for g, p in e.prices.items() if p > 0)
    assert e.prices[numeraire] > 0
    return scale_equilibrium(e, 1 / e.prices[numeraire])


# ---------------------------------------------------------------------------
# Independent verifier


def _segment_profit(rate: Fraction, p_out: Fraction, p_in: Fraction) -> Fraction:
    return rate * p_out - p_in


def verify_equilibrium(m: Market, e: Equilibrium) -> VerificationReport:
    """Exact three-part check: firm optimality, bundle optimality, clearing.

    Works against the capped market.  Implemented from the equilibrium
    characterization only (greedy plans and bang-per-buck partitions); no LCP
    machinery is reused.  Zero-priced goods (fallback output) are handled by
    treating their positive-slope segments as infinitely attractive and by
    allowing weak oversupply, which is free disposal.
    """
    out: list[VerificationViolation] = []

    def bad(clause: str, entity: str, message: str) -> None:
        out.append(VerificationViolation(clause, entity, message))

    prices = e.prices
    for g in m.goods:
        if g not in prices:
            bad("prices", g, "missing price")
            return VerificationReport(tuple(out))
        if prices[g] < 0:
            bad("prices", g, f"negative price {prices[g]}")
            return VerificationReport(tuple(out))

    # (a) production optimality: greedy profit per firm must match the plan.
    for f in m.firms:
        p_out = prices[f.produces]
        optimal = Fraction(0)
        plan_profit = Fraction(0)
        for g, segs in f.inputs.items():
            prev_full = True
            for k, seg in enumerate(segs, start=1):
                key = (f.name, g, k)
                x = e.firm_raw.get(key, Fraction(0))
                limit = seg.limit
                assert limit is not None, "verify expects a capped market"
                if x < 0 or x > limit:
                    bad("production-feasibility", f.name, f"raw amount on {key} outside [0, {limit}]")
                if x > 0 and not prev_full:
                    bad("production-order", f.name, f"segment {key} used before its predecessor is full")
                prev_full = x == limit
                profit_rate = _segment_profit(seg.rate, p_out, prices[g])
                if profit_rate > 0:
                    optimal += profit_rate * limit
                plan_profit += profit_rate * x
                recorded_out = e.firm_out.get(key, Fraction(0))
                if recorded_out != seg.rate * x:
                    bad("production-output", f.name, f"output on {key} is not rate * raw")
        if plan_profit != optimal:
            bad(
                "production-optimality",
                f.name,
                f"plan profit {plan_profit} differs from optimal {optimal}",
            )
        if e.profits.get(f.name, Fraction(0)) != optimal:
            bad("production-profit", f.name, f"recorded profit is not the optimal profit {optimal}")

    # (b) bundle optimality via the bang-per-buck partition.
    for a in m.agents:
        budget = sum((w * prices[g] for g, w in a.endowment.items()), Fraction(0))
        budget += sum(
            (share * e.profits.get(fn, Fraction(0)) for fn, share in a.shares.items()),
            Fraction(0),
        )
        free_keys: list[tuple[SegKey, Fraction]] = []  # zero price, positive slope
        classes: dict[Fraction, list[tuple[SegKey, Fraction]]] = {}
        zero_keys: list[SegKey] = []
        for g, segs in a.utility.items():
            for k, seg in enumerate(segs, start=1):
                key = (a.name, g, k)
                length = seg.length
                assert length is not None, "verify expects a capped market"
                if seg.slope == 0:
                    zero_keys.append(key)
                elif prices[g] == 0:
                    free_keys.append((key, length))
                else:
                    classes.setdefault(seg.slope / prices[g], []).append((key, length))

        for key, length in free_keys:
            if e.agent_alloc.get(key, Fraction(0)) != length:
                bad("bundle-forced", a.name, f"free-good segment {key} not fully allocated")

        remaining = budget
        exhausted = False
        for bpb in sorted(classes, reverse=True):
            members = classes[bpb]
            if exhausted:
                for key, _ in members:
                    if e.agent_alloc.get(key, Fraction(0)) != 0:
                        bad("bundle-undesirable", a.name, f"segment {key} bought beyond the flexible class")
                continue
            cost = sum((length * prices[key[1]] for key, length in members), Fraction(0))
            if remaining > cost:
                for key, length in members:
                    if e.agent_alloc.get(key, Fraction(0)) != length:
                        bad("bundle-forced", a.name, f"forced segment {key} not fully bought")
                remaining -= cost
            else:
                spent = Fraction(0)
                for key, length in members:
                    x = e.agent_alloc.get(key, Fraction(0))
                    if x < 0 or x > length:
                        bad("bundle-feasibility", a.name, f"allocation on {key} outside [0, {length}]")
                    spent += x * prices[key[1]]
                if spent != remaining:
                    bad(
                        "bundle-budget",
                        a.name,
                        f"flexible class spends {spent}, budget remainder is {remaining}",
                    )
                remaining = Fraction(0)
                exhausted = True
        if not exhausted and remaining != 0:
            bad("bundle-budget", a.name, f"budget not exhausted: {remaining} left with nothing desired")
        for key in zero_keys:
            if e.agent_alloc.get(key, Fraction(0)) != 0:
                bad("bundle-undesirable", a.name, f"zero-slope segment {key} bought")

    # (c) market clearing, exact; weak oversupply allowed only at price zero.
    produced: dict[str, Fraction] = {g: Fraction(0) for g in m.goods}
    for f, g, k, seg in m.production_segments():
        firm_output_good = next(fi.produces for fi in m.firms if fi.name == f)
        produced[firm_output_good] += e.firm_out.get((f, g, k), Fraction(0))
    for g in m.goods:
        consumed = Fraction(0)
        for a in m.agents:
            for k in range(1, len(a.utility.get(g, ())) + 1):
                consumed += e.agent_alloc.get((a.name, g, k), Fraction(0))
        for f in m.firms:
            for k in range(1, len(f.inputs.get(g, ())) + 1):
                consumed += e.firm_raw.get((f.name, g, k), Fraction(0))
        supplied = m.total_endowment(g) + produced[g]
        if prices[g] > 0:
            if consumed != supplied:
                bad("market-clearing", g, f"consumed {consumed} != supplied {supplied}")
        elif consumed > supplied:
            bad("market-clearing", g, f"consumed {consumed} > supplied {supplied} at price zero")

    # Sanity: the nonnegative-profit first-segment graph must be acyclic.
    # Zero-priced outputs are excluded: at price zero the profit sign carries
    # no information about rates, and no cycle can pass from a positive-priced
    # good through a zero-priced one.
    adj: dict[str, set[str]] = {g: set() for g in m.goods}
    for f in m.firms:
        if prices[f.produces] == 0:
            continue
        for g, segs in f.inputs.items():
            if segs and _segment_profit(segs[0].rate, prices[f.produces], prices[g]) >= 0:
                adj[f.produces].add(g)
    state: dict[str, int] = {}

    def cyclic(node: str) -> bool:
        state[node] = 1
        for nxt in adj[node]:
            mark = state.get(nxt)
            if mark == 1:
                return True
            if mark is None and cyclic(nxt):
                return True
        state[node] = 2
        return False

    for g in m.goods:
        if g not in state and cyclic(g):
            bad("profit-graph-acyclic", g, "nonnegative-profit production cycle at these prices")
            break

    return VerificationReport(tuple(out))


# ---------------------------------------------------------------------------
# Secondary-ray classification and the enough-demand fallback


def classify_ray(m: Market, index: VariableIndex, ray: SecondaryRay) -> SecondaryRayReport:
    """Split goods by the zero pattern of the ray's price direction and test
    which non-satiation case of the ray analysis applies."""
    vertex = index.decode(ray.vertex_y)
    direction = index.decode(ray.direction_y)
    s_goods = tuple(g for g in index.goods if direction.p_prime[g] == 0)
    if not s_goods or len(s_goods) == len(index.goods):
        classification = "degenerate"
        f_firms: tuple[str, ...] = ()
        a1: tuple[str, ...] = ()
    else:
        s_set = set(s_goods)
        f_firms = tuple(f.name for f in m.firms if f.produces in s_set)
        a1 = tuple(
            a.name
            for a in m.agents
            if analysis._non_satiated_goods_agent(a) & s_set
        )
        if not a1:
            classification = "a1-empty"
        elif len(a1) == len(m.agents):
            classification = "a1-all"
        else:
            classification = "a1-proper"
    return SecondaryRayReport(
        s_goods=s_goods,
        f_firms=f_firms,
        a1_agents=a1,
        classification=classification,
        vertex=vertex,
        direction=direction,
        vertex_z=ray.vertex_z,
        direction_z=ray.direction_z,
    )


def restrict_market(m: Market, ray: SecondaryRayReport) -> Market:
    """Remove the ray's constant-price goods and their producers.

    Input functions of surviving firms on removed goods are converted into
    endowment credits of the produced good: the full producible amount,
    distributed by profit shares.  The result intentionally breaks the
    unit-endowment normalization and must not be re-validated.
    """
    if not ray.s_goods:
        return m
    if ray.classification != "a1-empty":
        raise PreconditionError(f"ray is {ray.classification}, fallback needs a1-empty")
    s_set = set(ray.s_goods)
    f_set = set(ray.f_firms)
    goods = tuple(g for g in m.goods if g not in s_set)

    credits: dict[str, Fraction] = {}  # produced good -> total credited amount
    firms: list[Firm] = []
    for f in m.firms:
        if f.name in f_set:
            continue
        inputs: dict[str, tuple[ProductionSegment, ...]] = {}
        for g, segs in f.inputs.items():
            if g in s_set:
                d = sum((seg.rate * seg.limit for seg in segs if seg.limit is not None), Fraction(0))
                credits[f.produces] = credits.get(f.produces, Fraction(0)) + d
            else:
                inputs[g] = segs
        firms.append(Firm(name=f.name, produces=f.produces, inputs=inputs))

    agents: list[Agent] = []
    for a in m.agents:
        endowment = {g: w for g, w in a.endowment.items() if g not in s_set}
        for f in m.firms:
            if f.name in f_set:
                continue
            share = a.shares.get(f.name, Fraction(0))
            if not share:
                continue
            for g, segs in f.inputs.items():
                if g in s_set:
                    d = sum((seg.rate * seg.limit for seg in segs if seg.limit is not None), Fraction(0))
                    if d:
                        endowment[f.produces] = endowment.get(f.produces, Fraction(0)) + share * d
        shares = {fn: s for fn, s in a.shares.items() if fn not in f_set}
        utility = {g: segs for g, segs in a.utility.items() if g not in s_set}
        agents.append(Agent(name=a.name, endowment=endowment, shares=shares, utility=utility))

    return Market(goods=goods, agents=tuple(agents), firms=tuple(firms))


# ---------------------------------------------------------------------------
# Pipeline


def solve_market(
    m: Market,
    *,
    waive_demand: bool = False,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    trace: Callable[[str], None] | None = None,
    check_invariants: bool = False,
) -> SolveOutcome:
    """Checks, caps, floor, LCP build, pivot solve, extraction, fallback.

    Strong connectivity and no-production-out-of-nothing failures are hard
    stops.  An enough-demand failure stops too unless waived, in which case a
    secondary ray of the right kind triggers the restriction fallback (at most
    once per good).  A ray with all checks passing is an internal error: the
    no-secondary-ray theorem says it cannot happen.
    """
    report = validate_market(m)
    if not report.ok:
        raise InvalidMarketError(str(report))
    prod_check = analysis.check_no_production_out_of_nothing(m)
    if not prod_check.passed:
        return SolveOutcome(failure=prod_check)
    conn_check = analysis.check_strong_connectivity(m)
    if not conn_check.passed:
        return SolveOutcome(failure=conn_check)
    _, capped = analysis.compute_production_bound(m)
    demand_check = analysis.check_enough_demand(capped)
    if not demand_check.passed and not waive_demand:
        return SolveOutcome(failure=demand_check)
    return _solve_capped(
        capped,
        demand_ok=demand_check.passed,
        max_iterations=max_iterations,
        trace=trace,
        check_invariants=check_invariants,
        depth=0,
        iterations_so_far=0,
    )


def _solve_capped(
    capped: Market,
    *,
    demand_ok: bool,
    max_iterations: int,
    trace: Callable[[str], None] | None,
    check_invariants: bool,
    depth: int,
    iterations_so_far: int,
) -> SolveOutcome:
    floor = analysis.compute_price_floor(capped)
    nhad = build_nhad_lcp(capped, floor)
    outcome = lemke_solve(
        nhad.instance,
        max_iterations=max_iterations,
        trace=trace,
        check_invariants=check_invariants,
    )
    total = iterations_so_far + outcome.iterations
    if isinstance(outcome, Solution):
        violation = verify_lcp_solution(nhad.instance, outcome.y)
        if violation is not None:
            raise InternalSolverError(f"pivot solver returned an invalid solution: {violation}")
        eq = extract_equilibrium(capped, floor, nhad.index, outcome.y)
        return SolveOutcome(equilibrium=eq, iterations=total, restarts=depth)
    if isinstance(outcome, IterationLimit):
        return SolveOutcome(limit_hit=True, iterations=total, restarts=depth)
    assert isinstance(outcome, SecondaryRay)
    ray = classify_ray(capped, nhad.index, outcome)
    if demand_ok:
        raise InternalSolverError(
            "secondary ray despite all sufficiency checks passing; "
            f"classification={ray.classification} s_goods={ray.s_goods}"
        )
    if ray.classification != "a1-empty" or depth >= len(capped.goods):
        return SolveOutcome(ray=ray, iterations=total, restarts=depth)
    restricted = restrict_market(capped, ray)
    sub_demand = analysis.check_enough_demand(restricted)
    sub = _solve_capped(
        restricted,
        demand_ok=sub_demand.passed,
        max_iterations=max_iterations,
        trace=trace,
        check_invariants=check_invariants,
        depth=depth + 1,
        iterations_so_far=total,
    )
    if sub.equilibrium is None:
        return sub
    lifted = _lift_restricted_with_floor(capped, floor, ray, restricted, sub.equilibrium)
    check = verify_equilibrium(capped, lifted)
    if not check.ok:
        raise InternalSolverError(f"fallback reassembly failed verification:\n{check}")
    return SolveOutcome(equilibrium=lifted, iterations=sub.iterations, restarts=sub.restarts)


def _lift_restricted_with_floor(
    m: Market,
    floor: PriceFloor,
    ray: SecondaryRayReport,
    restricted: Market,
    sub: Equilibrium,
) -> Equilibrium:
    """Reassemble a full-market equilibrium from the restricted solve.

    Removed goods are priced zero and distributed freely: every positive-slope
    segment on them is filled, surviving firms run their removed input
    functions at full capacity, and removed firms keep their ray-vertex plans
    (whose removed-good prices are read at the vertex, p' + floor).
    """
    s_set = set(ray.s_goods)
    f_set = set(ray.f_firms)
    prices: dict[str, Fraction] = dict(sub.prices)
    for g in ray.s_goods:
        prices[g] = Fraction(0)

    agent_alloc = dict(sub.agent_alloc)
    for a in m.agents:
        for g in ray.s_goods:
            for k, seg in enumerate(a.utility.get(g, ()), start=1):
                assert seg.length is not None
                agent_alloc[(a.name, g, k)] = seg.length if seg.slope > 0 else Fraction(0)

    firm_raw = dict(sub.firm_raw)
    firm_out = dict(sub.firm_out)
    profits = dict(sub.profits)
    for f in m.firms:
        if f.name in f_set:
            # Producer of a removed good keeps its ray-vertex plan; on the ray
            # it cannot afford kept goods, so raw usage lives on removed goods
            # whose vertex prices are constant along the ray.
            profits[f.name] = Fraction(0)
            for g, segs in f.inputs.items():
                for k, seg in enumerate(segs, start=1):
                    key = (f.name, g, k)
                    money = ray.vertex.r[key]
                    if g not in s_set:
                        assert money == 0, "removed-good producer buying a kept good on the ray"
                        firm_raw[key] = Fraction(0)
                    else:
                        vertex_price = ray.vertex.p_prime[g] + floor.prices[g]
                        firm_raw[key] = money / vertex_price
                    firm_out[key] = seg.rate * firm_raw[key]
        else:
            for g, segs in f.inputs.items():
                if g not in s_set:
                    continue
                gain = Fraction(0)
                for k, seg in enumerate(segs, start=1):
                    key = (f.name, g, k)
                    assert seg.limit is not None
                    firm_raw[key] = seg.limit if seg.rate > 0 else Fraction(0)
                    firm_out[key] = seg.rate * firm_raw[key]
                    gain += firm_out[key]
                profits[f.name] = profits.get(f.name, Fraction(0)) + gain * prices[f.produces]

    return Equilibrium(
        prices=prices,
        agent_alloc=agent_alloc,
        firm_raw=firm_raw,
        firm_out=firm_out,
        profits=profits,
        zero_floor_goods=sub.zero_floor_goods,
    )


# ---------------------------------------------------------------------------
# Equilibrium document (bit-exact round trip)


def serialize_equilibrium(e: Equilibrium) -> str:
    agents: dict[str, dict[str, list[str]]] = {}
    for (a, g, k), amount in e.agent_alloc.items():
        arr = agents.setdefault(a, {}).setdefault(g, [])
        while len(arr) < k:
            arr.append("0")
        arr[k - 1] = rational_to_str(amount)
    firms: dict[str, dict] = {}
    for (f, g, k), amount in e.firm_raw.items():
        entry = firms.setdefault(f, {"inputs": {}, "profit": "0"})
        block = entry["inputs"].setdefault(g, {"raw": [], "output": []})
        while len(block["raw"]) < k:
            block["raw"].append("0")
            block["output"].append("0")
        block["raw"][k - 1] = rational_to_str(amount)
        block["output"][k - 1] = rational_to_str(e.firm_out.get((f, g, k), Fraction(0)))
    for f, profit in e.profits.items():
        firms.setdefault(f, {"inputs": {}, "profit": "0"})["profit"] = rational_to_str(profit)
    doc = {
        "prices": {g: rational_to_str(p) for g, p in e.prices.items()},
        "agents": agents,
        "firms": firms,
        "zero_floor_goods": list(e.zero_floor_goods),
    }
    return json.dumps(doc, indent=2)


def parse_equilibrium(text: str | bytes) -> Equilibrium:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    doc = json.loads(text)
    prices = {g: rational_from_str(s, f"prices.{g}") for g, s in doc["prices"].items()}
    agent_alloc: dict[SegKey, Fraction] = {}
    for a, by_good in doc.get("agents", {}).items():
        for g, arr in by_good.items():
            for k, s in enumerate(arr, start=1):
                agent_alloc[(a, g, k)] = rational_from_str(s, f"agents.{a}.{g}[{k}]")
    firm_raw: dict[SegKey, Fraction] = {}
    firm_out: dict[SegKey, Fraction] = {}
    profits: dict[str, Fraction] = {}
    for f, entry in doc.get("firms", {}).items():
        profits[f] = rational_from_str(entry.get("profit", "0"), f"firms.{f}.profit")
        for g, block in entry.get("inputs", {}).items():
            for k, s in enumerate(block.get("raw", []), start=1):
                firm_raw[(f, g, k)] = rational_from_str(s, f"firms.{f}.{g}.raw[{k}]")
            for k, s in enumerate(block.get("output", []), start=1):
                firm_out[(f, g, k)] = rational_from_str(s, f"firms.{f}.{g}.output[{k}]")
    return Equilibrium(
        prices=prices,
        agent_alloc=agent_alloc,
        firm_raw=firm_raw,
        firm_out=firm_out,
        profits=profits,
        zero_floor_goods=tuple(doc.get("zero_floor_goods", ())),
    )
