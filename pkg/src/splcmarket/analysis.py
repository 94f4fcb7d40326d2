"""Sufficiency checks, safe segment caps, and the price floor.

Three conditions make an equilibrium reachable by the pivot solver:

* *no production out of nothing* — every cycle in the goods production graph
  multiplies to strictly less than one (cycles at exactly one count as
  vacuous production and are rejected too);
* *strong connectivity* — the possession/non-satiation graph over agents and
  firms has one strongly connected component containing every agent;
* *enough demand* — every good is desired beyond its unit base stock.

The cycle check and the price floor share one mechanism: a max-product
Bellman-Ford relaxation over the goods graph, inflated by ``1 + delta``.  If
the relaxation converges within ``n`` rounds the fixed point is a strictly
interior floor vector; if it still improves after ``n`` rounds, the
predecessor chain contains a cycle, which is verified exactly and either
reported as a witness or dismissed by halving ``delta``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable

from .model import (
    Agent,
    Firm,
    Market,
    ProductionSegment,
    UtilitySegment,
    rational_to_str,
)

__all__ = [
    "GoodsEdge",
    "GoodsGraph",
    "AgentFirmGraph",
    "CheckReport",
    "PriceFloor",
    "PreconditionError",
    "production_graph",
    "agent_firm_graph",
    "check_no_production_out_of_nothing",
    "check_strong_connectivity",
    "check_enough_demand",
    "run_all_checks",
    "desire",
    "compute_production_bound",
    "compute_price_floor",
]

MAX_DELTA_HALVINGS = 64


class PreconditionError(RuntimeError):
    """A computation was invoked on a market violating its precondition."""


@dataclass(frozen=True)
class GoodsEdge:
    """Producing firm turns ``input_good`` into ``output_good`` at ``multiplier`` (first-segment rate)."""

    input_good: str
    output_good: str
    multiplier: Fraction
    firm: str


@dataclass(frozen=True)
class GoodsGraph:
    nodes: tuple[str, ...]
    edges: tuple[GoodsEdge, ...]


@dataclass(frozen=True)
class AgentFirmGraph:
    """Possession/non-satiation graph; nodes are ("agent", name) or ("firm", name)."""

    nodes: tuple[tuple[str, str], ...]
    edges: tuple[tuple[tuple[str, str], tuple[str, str]], ...]


@dataclass(frozen=True)
class CheckReport:
    condition: str
    passed: bool
    witness: dict | None = None

    def to_obj(self) -> dict:
        return {"condition": self.condition, "pass": self.passed, "witness": self.witness}


@dataclass(frozen=True)
class PriceFloor:
    """Strictly interior point of the no-profitable-segment polyhedron.

    ``prices[j] > 1`` for every good and ``rate * prices[output] < prices[input]``
    strictly for every production edge.
    """

    prices: dict[str, Fraction]
    delta: Fraction


def production_graph(m: Market) -> GoodsGraph:
    """One edge per (firm, input good) with a positive first-segment rate.

    First segments suffice: rates decrease strictly within a segment list, so
    the first rate dominates every feasibility question the graph answers.
    """
    edges = []
    for f in m.firms:
        for g in m.goods:
            segs = f.inputs.get(g)
            if segs and segs[0].rate > 0:
                edges.append(GoodsEdge(g, f.produces, segs[0].rate, f.name))
    return GoodsGraph(nodes=m.goods, edges=tuple(edges))


def _non_satiated_goods_agent(a: Agent) -> set[str]:
    return {g for g, segs in a.utility.items() if segs and segs[-1].slope > 0}


def _non_satiated_goods_firm(f: Firm) -> set[str]:
    return {g for g, segs in f.inputs.items() if segs and segs[-1].rate > 0}


def agent_firm_graph(m: Market) -> AgentFirmGraph:
    nodes: list[tuple[str, str]] = [("agent", a.name) for a in m.agents]
    nodes += [("firm", f.name) for f in m.firms]

    possessed: dict[tuple[str, str], set[str]] = {}
    hungry: dict[tuple[str, str], set[str]] = {}
    for a in m.agents:
        possessed[("agent", a.name)] = {g for g, w in a.endowment.items() if w > 0}
        hungry[("agent", a.name)] = _non_satiated_goods_agent(a)
    for f in m.firms:
        possessed[("firm", f.name)] = {f.produces}
        hungry[("firm", f.name)] = _non_satiated_goods_firm(f)

    edges = []
    for src in nodes:
        for dst in nodes:
            if src != dst and possessed[src] & hungry[dst]:
                edges.append((src, dst))
    return AgentFirmGraph(nodes=tuple(nodes), edges=tuple(edges))


# ---------------------------------------------------------------------------
# Max-product relaxation (shared by the cycle check and the floor)


def _relax(
    graph: GoodsGraph, delta: Fraction
) -> tuple[dict[str, Fraction], None] | tuple[None, tuple[GoodsEdge, ...]]:
    """Run n rounds of c[j] <- max(c[j], (1+delta)*rate*c[output]).

    Returns (fixed point, None) on convergence, or (None, cycle) when the
    relaxation still improves after n rounds; the cycle is read off the
    predecessor chain and is a genuine directed cycle of the graph.
    """
    n = len(graph.nodes)
    inflate = 1 + delta
    c = {g: inflate for g in graph.nodes}
    pred: dict[str, GoodsEdge] = {}

    def sweep() -> str | None:
        improved_at = None
        for e in graph.edges:
            candidate = inflate * e.multiplier * c[e.output_good]
            if candidate > c[e.input_good]:
                c[e.input_good] = candidate
                pred[e.input_good] = e
                improved_at = e.input_good
        return improved_at

    for _ in range(n):
        if sweep() is None:
            return c, None

    start = sweep()
    if start is None:
        return c, None

    # Walk predecessors n steps to land inside a cycle, then collect it.
    cur = start
    for _ in range(n):
        cur = pred[cur].output_good
    cycle_nodes: list[str] = []
    cycle_edges: list[GoodsEdge] = []
    node = cur
    while node not in cycle_nodes:
        cycle_nodes.append(node)
        cycle_edges.append(pred[node])
        node = pred[node].output_good
    offset = cycle_nodes.index(node)
    return None, tuple(cycle_edges[offset:])


def _cycle_schedule(
    m: Market,
) -> tuple[PriceFloor, None] | tuple[None, tuple[GoodsEdge, ...]]:
    """Halve delta until either the relaxation converges (floor found) or a
    cycle with exact multiplier product >= 1 is extracted (check fails)."""
    graph = production_graph(m)
    delta = Fraction(1, 2)
    for _ in range(MAX_DELTA_HALVINGS + 1):
        c, cycle = _relax(graph, delta)
        if c is not None:
            return PriceFloor(prices=c, delta=delta), None
        assert cycle is not None
        product = Fraction(1)
        for e in cycle:
            product *= e.multiplier
        if product >= 1:
            return None, cycle
        delta /= 2
    raise RuntimeError(
        f"cycle check inconclusive after {MAX_DELTA_HALVINGS} delta halvings; "
        "a cycle product is pathologically close to (but below) 1"
    )


def check_no_production_out_of_nothing(m: Market) -> CheckReport:
    """Pass iff every directed cycle of the goods graph multiplies to < 1.

    A cycle at exactly 1 is vacuous production and fails as well.  The failure
    witness is one violating cycle with its exact product.
    """
    floor, cycle = _cycle_schedule(m)
    if floor is not None:
        return CheckReport("no-production-out-of-nothing", True)
    assert cycle is not None
    product = Fraction(1)
    for e in cycle:
        product *= e.multiplier
    witness = {
        "cycle": [e.input_good for e in cycle],
        "firms": [e.firm for e in cycle],
        "product": rational_to_str(product),
    }
    return CheckReport("no-production-out-of-nothing", False, witness)


def compute_price_floor(m: Market) -> PriceFloor:
    """Deterministic strictly-interior floor vector.

    Start at 1 + delta everywhere and propagate ``(1+delta) * rate * c[output]``
    along production edges for n rounds; halve delta and restart if the
    relaxation has not settled.  At any fixed point the strict inequalities
    hold automatically since every edge satisfies
    ``(1+delta) * rate * c[output] <= c[input]``.
    """
    floor, cycle = _cycle_schedule(m)
    if floor is None:
        assert cycle is not None
        path = " -> ".join([e.input_good for e in cycle] + [cycle[0].input_good])
        raise PreconditionError(f"no-production-out-of-nothing violated by cycle {path}")
    for g, value in floor.prices.items():
        assert value > 1, g
    for e in production_graph(m).edges:
        assert e.multiplier * floor.prices[e.output_good] < floor.prices[e.input_good], e
    return floor


# ---------------------------------------------------------------------------
# Strong connectivity


def _tarjan_scc(nodes: Iterable, adj: dict) -> list[list]:
    """Iterative Tarjan; returns components in reverse topological order."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    comps: list[list] = []
    counter = 0

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(adj.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(adj.get(nxt, ()))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.append(member)
                    if member == node:
                        break
                comps.append(comp)
    return comps


def check_strong_connectivity(m: Market) -> CheckReport:
    """Pass iff one strongly connected component contains every agent node.

    On failure the witness is a nonempty proper subset of agents that no other
    agent can reach (agents of an agent-bearing component with no agent-bearing
    ancestor in the condensation).
    """
    graph = agent_firm_graph(m)
    adj: dict = {node: [] for node in graph.nodes}
    for src, dst in graph.edges:
        adj[src].append(dst)
    comps = _tarjan_scc(graph.nodes, adj)
    comp_of = {}
    for i, comp in enumerate(comps):
        for node in comp:
            comp_of[node] = i

    agent_nodes = [node for node in graph.nodes if node[0] == "agent"]
    agent_comps = {comp_of[node] for node in agent_nodes}
    if len(agent_comps) == 1:
        return CheckReport("strong-connectivity", True)

    rev: dict[int, set[int]] = {i: set() for i in range(len(comps))}
    for src, dst in graph.edges:
        if comp_of[src] != comp_of[dst]:
            rev[comp_of[dst]].add(comp_of[src])

    for comp_id in sorted(agent_comps):
        seen = {comp_id}
        frontier = [comp_id]
        has_agent_ancestor = False
        while frontier and not has_agent_ancestor:
            cur = frontier.pop()
            for prev in rev[cur]:
                if prev in seen:
                    continue
                if prev in agent_comps:
                    has_agent_ancestor = True
                    break
                seen.add(prev)
                frontier.append(prev)
        if not has_agent_ancestor:
            agents = sorted(node[1] for node in comps[comp_id] if node[0] == "agent")
            return CheckReport("strong-connectivity", False, {"agents": agents})
    raise RuntimeError("condensation of a DAG must contain a minimal agent component")


# ---------------------------------------------------------------------------
# Enough demand


def desire(m: Market, good: str) -> Fraction | None:
    """Total amount spanned by positive-slope utility segments; None means infinite."""
    total = Fraction(0)
    for a in m.agents:
        for seg in a.utility.get(good, ()):
            if seg.slope > 0:
                if seg.length is None:
                    return None
                total += seg.length
    return total


def check_enough_demand(m: Market) -> CheckReport:
    """Pass iff desire(j) > 1 for every good (strict; segment caps applied first)."""
    weak: list[dict] = []
    for g in m.goods:
        d = desire(m, g)
        if d is not None and d <= 1:
            weak.append({"good": g, "desire": rational_to_str(d)})
    if weak:
        return CheckReport("enough-demand", False, {"goods": weak})
    return CheckReport("enough-demand", True)


def run_all_checks(m: Market) -> list[CheckReport]:
    """The three sufficiency checks against the capped market."""
    _, capped = compute_production_bound(m)
    return [
        check_no_production_out_of_nothing(m),
        check_strong_connectivity(m),
        check_enough_demand(capped),
    ]


# ---------------------------------------------------------------------------
# Safe caps


def compute_production_bound(m: Market) -> tuple[Fraction, Market]:
    """Bound L = n^n (alpha_max + 1)^n on any chain's production, plus a capped copy.

    Unbounded production limits become L / max(1, alpha_min) and unbounded
    utility lengths become L + 1; both are unreachable at any equilibrium, so
    capping changes nothing the solver can see.
    """
    n = len(m.goods)
    rates = [seg.rate for _, _, _, seg in m.production_segments()]
    alpha_max = max(rates, default=Fraction(0))
    nonzero = [r for r in rates if r > 0]
    alpha_min = min(nonzero) if nonzero else Fraction(1)
    big_l = Fraction(n) ** n * (alpha_max + 1) ** n
    prod_cap = big_l / max(Fraction(1), alpha_min)
    util_cap = big_l + 1

    def cap_utility(segs: tuple[UtilitySegment, ...]) -> tuple[UtilitySegment, ...]:
        return tuple(
            UtilitySegment(s.slope, util_cap) if s.length is None else s for s in segs
        )

    def cap_production(segs: tuple[ProductionSegment, ...]) -> tuple[ProductionSegment, ...]:
        return tuple(
            ProductionSegment(s.rate, prod_cap) if s.limit is None else s for s in segs
        )

    agents = tuple(
        replace(a, utility={g: cap_utility(segs) for g, segs in a.utility.items()})
        for a in m.agents
    )
    firms = tuple(
        replace(f, inputs={g: cap_production(segs) for g, segs in f.inputs.items()})
        for f in m.firms
    )
    return big_l, Market(goods=m.goods, agents=agents, firms=firms)
