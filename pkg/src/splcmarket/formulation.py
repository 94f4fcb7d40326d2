"""Assembly of the dehomogenized market LCP from a capped market and a price floor.

Variable vector layout (one block per family, fixed order):

    y = ( r[f,j,k] | beta[f,j,k] | p'[j] | lambda[i] | q[i,j,k] | gamma[i,j,k] )

with r/beta indexed by production segments, p' by goods, lambda by agents and
q/gamma by utility segments.  Row families pair with the variable blocks in the
same order: per-segment profitability rows pair with r, per-segment capacity
rows with beta, per-good clearing rows with p', per-agent budget rows with
lambda (these carry the z covering entry and the only negative right-hand
sides), and per-segment bundle/length rows with q and gamma.  The system is
square by construction.

Firm revenue and profit placeholders are eliminated at build time: segment
revenue expands to ``r + limit * beta`` and firm profit to
``sum(limit * beta)`` over the firm's segments.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .analysis import PriceFloor
from .lcp import LcpInstance
from .model import Market, rational_to_str

__all__ = [
    "VariableIndex",
    "DecodedPoint",
    "NhadLcp",
    "index_variables",
    "build_nhad_lcp",
    "row_dependency_residual",
    "dump_nhad_lcp",
]

SegKey = tuple[str, str, int]


@dataclass(frozen=True)
class VariableIndex:
    """Bidirectional map between flat indices and semantic labels."""

    production_segments: tuple[SegKey, ...]
    goods: tuple[str, ...]
    agents: tuple[str, ...]
    utility_segments: tuple[SegKey, ...]

    @property
    def n_variables(self) -> int:
        return (
            2 * len(self.production_segments)
            + len(self.goods)
            + len(self.agents)
            + 2 * len(self.utility_segments)
        )

    @cached_property
    def _prod_pos(self) -> dict[SegKey, int]:
        return {key: i for i, key in enumerate(self.production_segments)}

    @cached_property
    def _util_pos(self) -> dict[SegKey, int]:
        return {key: i for i, key in enumerate(self.utility_segments)}

    def r(self, key: SegKey) -> int:
        return self._prod_pos[key]

    def beta(self, key: SegKey) -> int:
        return len(self.production_segments) + self._prod_pos[key]

    def p_prime(self, good: str) -> int:
        return 2 * len(self.production_segments) + self.goods.index(good)

    def lam(self, agent: str) -> int:
        return 2 * len(self.production_segments) + len(self.goods) + self.agents.index(agent)

    def q(self, key: SegKey) -> int:
        return (
            2 * len(self.production_segments)
            + len(self.goods)
            + len(self.agents)
            + self._util_pos[key]
        )

    def gamma(self, key: SegKey) -> int:
        return self.q(key) + len(self.utility_segments)

    def label(self, index: int) -> tuple[str, ...]:
        p, n, m, u = (
            len(self.production_segments),
            len(self.goods),
            len(self.agents),
            len(self.utility_segments),
        )
        if index < p:
            return ("r", *self.production_segments[index])
        index -= p
        if index < p:
            return ("beta", *self.production_segments[index])
        index -= p
        if index < n:
            return ("p_prime", self.goods[index])
        index -= n
        if index < m:
            return ("lambda", self.agents[index])
        index -= m
        if index < u:
            return ("q", *self.utility_segments[index])
        index -= u
        if index < u:
            return ("gamma", *self.utility_segments[index])
        raise IndexError(index)

    def decode(self, y: Sequence[Fraction]) -> "DecodedPoint":
        p = len(self.production_segments)
        n = len(self.goods)
        m = len(self.agents)
        u = len(self.utility_segments)
        assert len(y) == self.n_variables
        return DecodedPoint(
            r={key: y[i] for i, key in enumerate(self.production_segments)},
            beta={key: y[p + i] for i, key in enumerate(self.production_segments)},
            p_prime={g: y[2 * p + i] for i, g in enumerate(self.goods)},
            lam={a: y[2 * p + n + i] for i, a in enumerate(self.agents)},
            q={key: y[2 * p + n + m + i] for i, key in enumerate(self.utility_segments)},
            gamma={key: y[2 * p + n + m + u + i] for i, key in enumerate(self.utility_segments)},
        )


@dataclass(frozen=True)
class DecodedPoint:
    """A point of the LCP variable space, split by family."""

    r: dict[SegKey, Fraction]
    beta: dict[SegKey, Fraction]
    p_prime: dict[str, Fraction]
    lam: dict[str, Fraction]
    q: dict[SegKey, Fraction]
    gamma: dict[SegKey, Fraction]


@dataclass(frozen=True)
class NhadLcp:
    instance: LcpInstance
    index: VariableIndex
    floor: PriceFloor


def index_variables(m: Market) -> VariableIndex:
    """Deterministic layout over the capped market's segments, goods and agents."""
    return VariableIndex(
        production_segments=tuple((f, g, k) for f, g, k, _ in m.production_segments()),
        goods=m.goods,
        agents=tuple(a.name for a in m.agents),
        utility_segments=tuple((a, g, k) for a, g, k, _ in m.utility_segments()),
    )


def build_nhad_lcp(m: Market, floor: PriceFloor) -> NhadLcp:
    """Emit the square LCP whose z = 0 solutions are exactly the equilibria.

    Requires a capped market (no unbounded segments) and a strictly interior
    floor; both are asserted.  The covering vector is 1 exactly on agent rows.
    """
    index = index_variables(m)
    size = index.n_variables
    c = floor.prices
    zero = Fraction(0)

    matrix = [[zero] * size for _ in range(size)]
    rhs: list[Fraction] = [zero] * size
    covering = [0] * size

    prod_segs = index.production_segments
    util_segs = index.utility_segments
    p_count = len(prod_segs)
    firm_by_name = {f.name: f for f in m.firms}

    seg_limit: dict[SegKey, Fraction] = {}
    seg_rate: dict[SegKey, Fraction] = {}
    for fname, g, k, seg in m.production_segments():
        assert seg.limit is not None, "market must be capped before building the LCP"
        seg_limit[(fname, g, k)] = seg.limit
        seg_rate[(fname, g, k)] = seg.rate
    seg_length: dict[SegKey, Fraction] = {}
    seg_slope: dict[SegKey, Fraction] = {}
    for aname, g, k, seg in m.utility_segments():
        assert seg.length is not None, "market must be capped before building the LCP"
        seg_length[(aname, g, k)] = seg.length
        seg_slope[(aname, g, k)] = seg.slope

    # Profitability rows, paired with r: rate*p'[out] - p'[in] - beta <= c[in] - rate*c[out]
    for t, key in enumerate(prod_segs):
        fname, g, k = key
        out_good = firm_by_name[fname].produces
        rate = seg_rate[key]
        row = matrix[t]
        row[index.p_prime(out_good)] += rate
        row[index.p_prime(g)] -= 1
        row[index.beta(key)] -= 1
        rhs[t] = c[g] - rate * c[out_good]
        if rate > 0:
            assert rhs[t] > 0, "floor must be strictly interior"

    # Capacity rows, paired with beta: r - limit*p'[in] <= limit*c[in]
    for t, key in enumerate(prod_segs):
        fname, g, k = key
        limit = seg_limit[key]
        row = matrix[p_count + t]
        row[index.r(key)] += 1
        row[index.p_prime(g)] -= limit
        rhs[p_count + t] = limit * c[g]

    # Good rows, paired with p': money spent on the good minus the value of
    # its base stock minus the revenue of its producers (revenue expanded to
    # r + limit*beta).  The base stock is the actual endowment total, which is
    # 1 under the usual normalization but 0 for produced-only goods and can
    # exceed 1 after fallback endowment credits.
    base = 2 * p_count
    for gi, g in enumerate(m.goods):
        row = matrix[base + gi]
        stock = m.total_endowment(g)
        for key in util_segs:
            if key[1] == g:
                row[index.q(key)] += 1
        for key in prod_segs:
            if key[1] == g:
                row[index.r(key)] += 1
        row[index.p_prime(g)] -= stock
        for f in m.producers_of(g):
            for key in prod_segs:
                if key[0] == f.name:
                    row[index.r(key)] -= 1
                    row[index.beta(key)] -= seg_limit[key]
        rhs[base + gi] = stock * c[g]

    # Agent rows, paired with lambda; the only rows with negative rhs and the
    # only rows covered by z.  Firm profit expands to sum(limit*beta).
    base = 2 * p_count + len(m.goods)
    for ai, agent in enumerate(m.agents):
        row = matrix[base + ai]
        budget_floor = zero
        for g, w in agent.endowment.items():
            if w:
                row[index.p_prime(g)] += w
                budget_floor += w * c[g]
        for fname, share in agent.shares.items():
            if share:
                for key in prod_segs:
                    if key[0] == fname:
                        row[index.beta(key)] += share * seg_limit[key]
        for key in util_segs:
            if key[0] == agent.name:
                row[index.q(key)] -= 1
        rhs[base + ai] = -budget_floor
        covering[base + ai] = 1

    # Bundle rows, paired with q: slope*lambda - p' - gamma <= c
    base = 2 * p_count + len(m.goods) + len(m.agents)
    for t, key in enumerate(util_segs):
        aname, g, k = key
        row = matrix[base + t]
        row[index.lam(aname)] += seg_slope[key]
        row[index.p_prime(g)] -= 1
        row[index.gamma(key)] -= 1
        rhs[base + t] = c[g]

    # Length rows, paired with gamma: q - length*p' <= length*c
    base += len(util_segs)
    for t, key in enumerate(util_segs):
        aname, g, k = key
        row = matrix[base + t]
        row[index.q(key)] += 1
        row[index.p_prime(g)] -= seg_length[key]
        rhs[base + t] = seg_length[key] * c[g]

    instance = LcpInstance(
        matrix=tuple(tuple(row) for row in matrix),
        q=tuple(rhs),
        covering=tuple(covering),
    )
    nhad = NhadLcp(instance=instance, index=index, floor=floor)
    _assert_sign_pattern(nhad, m)
    return nhad


def _assert_sign_pattern(nhad: NhadLcp, m: Market) -> None:
    index = nhad.index
    p_count = len(index.production_segments)
    agent_lo = 2 * p_count + len(index.goods)
    agent_hi = agent_lo + len(index.agents)
    for i, qi in enumerate(nhad.instance.q):
        if agent_lo <= i < agent_hi:
            assert qi < 0, f"agent row {i} must have negative rhs"
            assert nhad.instance.covering[i] == 1
        else:
            assert qi >= 0, f"non-agent row {i} must have nonnegative rhs"
            assert nhad.instance.covering[i] == 0
    coeffs, rhs = row_dependency_residual(nhad)
    assert all(v == 0 for v in coeffs) and rhs == 0, "good/agent row dependency broken"


def row_dependency_residual(nhad: NhadLcp) -> tuple[tuple[Fraction, ...], Fraction]:
    """Sum of good rows plus sum of agent rows (coefficients and rhs).

    Exactly the zero row for every market: the one inherent degeneracy of the
    system (endowment-weighted price terms cancel against the agent rows).
    """
    index = nhad.index
    p_count = len(index.production_segments)
    lo = 2 * p_count
    hi = lo + len(index.goods) + len(index.agents)
    size = nhad.instance.n
    coeffs = [Fraction(0)] * size
    total = Fraction(0)
    for i in range(lo, hi):
        row = nhad.instance.matrix[i]
        for j in range(size):
            coeffs[j] += row[j]
        total += nhad.instance.q[i]
    return tuple(coeffs), total


def dump_nhad_lcp(nhad: NhadLcp) -> str:
    """Debug dump: dimensions header, then one row per line as rational lists."""
    lines = [f"nhad-lcp n={nhad.instance.n}"]
    for i in range(nhad.instance.n):
        cells = " ".join(rational_to_str(v) for v in nhad.instance.matrix[i])
        lines.append(
            f"row {i} [{' '.join(str(x) for x in nhad.index.label(i))}] "
            f"| {cells} | z={nhad.instance.covering[i]} | q={rational_to_str(nhad.instance.q[i])}"
        )
    return "\n".join(lines)
