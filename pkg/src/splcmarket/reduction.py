"""Reduction of an exchange market to an equivalent production market.

Each agent of the exchange market gets a private synthetic good and a private
firm that manufactures it; the firm's production function on every input good
is a segment-by-segment copy of the agent's utility function there.  The agent
keeps her endowment, owns the firm outright, and wants only the synthetic good
(one unbounded linear segment).  Equilibria correspond one-to-one: the firm's
raw bundle is the agent's optimal bundle, and prices restrict/extend directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .equilibrium import Equilibrium
from .model import (
    Agent,
    Firm,
    Market,
    ProductionSegment,
    UtilitySegment,
)

__all__ = [
    "ReductionMap",
    "exchange_to_production",
    "project_equilibrium",
    "lift_exchange_equilibrium",
    "serialize_reduction_map",
]

UTILITY_GOOD_SUFFIX = "::util"
UTILITY_FIRM_SUFFIX = "::firm"


@dataclass(frozen=True)
class ReductionMap:
    """Bookkeeping between the exchange market and its production twin."""

    original_goods: tuple[str, ...]
    utility_good: dict[str, str]  # agent -> synthetic good
    utility_firm: dict[str, str]  # agent -> synthetic firm

    def to_obj(self) -> dict:
        return {
            "original_goods": list(self.original_goods),
            "utility_good": dict(self.utility_good),
            "utility_firm": dict(self.utility_firm),
        }


def serialize_reduction_map(rmap: ReductionMap) -> str:
    return json.dumps(rmap.to_obj(), indent=2)


def exchange_to_production(m: Market) -> tuple[Market, ReductionMap]:
    """Build the production twin of a firm-free SPLC exchange market.

    The synthetic goods carry zero endowment (they are only produced), so the
    twin always fails the enough-demand check on the original goods; solve it
    with the demand waiver and the fallback armed.
    """
    if m.firms:
        raise ValueError("reduction expects an exchange market (no firms)")
    utility_good = {a.name: f"{a.name}{UTILITY_GOOD_SUFFIX}" for a in m.agents}
    utility_firm = {a.name: f"{a.name}{UTILITY_FIRM_SUFFIX}" for a in m.agents}
    clash = set(m.goods) & set(utility_good.values())
    if clash:
        raise ValueError(f"good names collide with synthetic goods: {sorted(clash)}")

    goods = m.goods + tuple(utility_good[a.name] for a in m.agents)
    firms = tuple(
        Firm(
            name=utility_firm[a.name],
            produces=utility_good[a.name],
            inputs={
                g: tuple(ProductionSegment(rate=s.slope, limit=s.length) for s in segs)
                for g, segs in a.utility.items()
            },
        )
        for a in m.agents
    )
    agents = tuple(
        Agent(
            name=a.name,
            endowment=dict(a.endowment),
            shares={utility_firm[a.name]: Fraction(1)},
            utility={utility_good[a.name]: (UtilitySegment(slope=Fraction(1), length=None),)},
        )
        for a in m.agents
    )
    reduced = Market(goods=goods, agents=agents, firms=firms)
    rmap = ReductionMap(
        original_goods=m.goods,
        utility_good=utility_good,
        utility_firm=utility_firm,
    )
    return reduced, rmap


def project_equilibrium(rmap: ReductionMap, reduced_eq: Equilibrium) -> Equilibrium:
    """Map a production-twin equilibrium back to the exchange market.

    Exchange prices are the twin's prices restricted to original goods; agent
    allocations are the private firm's raw bundles, segment by segment.
    """
    prices = {g: reduced_eq.prices[g] for g in rmap.original_goods}
    agent_alloc: dict[tuple[str, str, int], Fraction] = {}
    firm_owner = {firm: agent for agent, firm in rmap.utility_firm.items()}
    for (firm, good, k), amount in reduced_eq.firm_raw.items():
        agent = firm_owner[firm]
        agent_alloc[(agent, good, k)] = amount
    return Equilibrium(
        prices=prices,
        agent_alloc=agent_alloc,
        firm_raw={},
        firm_out={},
        profits={},
        zero_floor_goods=tuple(g for g in reduced_eq.zero_floor_goods if g in prices),
    )


def lift_exchange_equilibrium(
    rmap: ReductionMap, exchange: Market, e: Equilibrium
) -> Equilibrium:
    """Reverse direction: extend an exchange equilibrium to the production twin.

    The synthetic good of agent i is priced at the inverse of her marginal
    utility per unit of money (the money value of one util at her margin);
    her firm's plan is her bundle, and her consumption is the firm's output.
    """
    prices: dict[str, Fraction] = {g: e.prices[g] for g in rmap.original_goods}
    agent_alloc: dict[tuple[str, str, int], Fraction] = {}
    firm_raw: dict[tuple[str, str, int], Fraction] = {}
    firm_out: dict[tuple[str, str, int], Fraction] = {}
    profits: dict[str, Fraction] = {}

    for a in exchange.agents:
        # Marginal bang per buck: the smallest bpb among segments she buys,
        # equivalently the bpb of her flexible partition.
        marginal: Fraction | None = None
        for g, segs in a.utility.items():
            for k, seg in enumerate(segs, start=1):
                x = e.agent_alloc.get((a.name, g, k), Fraction(0))
                if x > 0 and seg.slope > 0:
                    bpb = seg.slope / e.prices[g]
                    if marginal is None or bpb < marginal:
                        marginal = bpb
        if marginal is None:
            raise ValueError(f"agent {a.name} buys nothing; marginal utility undefined")
        util_price = 1 / marginal
        prices[rmap.utility_good[a.name]] = util_price

        firm = rmap.utility_firm[a.name]
        total_output = Fraction(0)
        spend = Fraction(0)
        for g, segs in a.utility.items():
            for k, seg in enumerate(segs, start=1):
                x = e.agent_alloc.get((a.name, g, k), Fraction(0))
                firm_raw[(firm, g, k)] = x
                firm_out[(firm, g, k)] = seg.slope * x
                total_output += seg.slope * x
                spend += x * e.prices[g]
        agent_alloc[(a.name, rmap.utility_good[a.name], 1)] = total_output
        profits[firm] = total_output * util_price - spend

    return Equilibrium(
        prices=prices,
        agent_alloc=agent_alloc,
        firm_raw=firm_raw,
        firm_out=firm_out,
        profits=profits,
        zero_floor_goods=(),
    )
