from dataclasses import replace
from fractions import Fraction as F

import pytest

from splcmarket import analysis
from splcmarket.equilibrium import (
    InvalidMarketError,
    parse_equilibrium,
    scale_equilibrium,
    serialize_equilibrium,
    solve_market,
    verify_equilibrium,
)
from splcmarket.model import parse_market

from conftest import M1_TEXT


def _capped(m):
    return analysis.compute_production_bound(m)[1]


def test_m0_solution(m0):
    outcome = solve_market(m0, check_invariants=True)
    assert outcome.kind == "equilibrium"
    e = outcome.equilibrium
    # Both prices sit on the floor: proportional to (1, 1).
    assert e.prices["g1"] == e.prices["g2"] == F(3, 2)
    assert e.agent_alloc[("a1", "g2", 1)] == 1
    assert e.agent_alloc[("a2", "g1", 1)] == 1
    assert e.firm_raw[("f1", "g1", 1)] == 0
    assert e.profits["f1"] == 0
    assert verify_equilibrium(_capped(m0), e).ok


def test_m1_solution_exact_vertex(m1):
    outcome = solve_market(m1, check_invariants=True)
    e = outcome.equilibrium
    assert e.prices == {"g1": F(27, 4), "g2": F(27, 8)}
    assert e.agent_alloc == {("a1", "g2", 1): F(5, 2), ("a2", "g1", 1): F(1, 2)}
    assert e.firm_raw[("f1", "g1", 1)] == F(1, 2)
    assert e.firm_out[("f1", "g1", 1)] == F(3, 2)
    assert e.profits == {"f1": F(27, 16)}
    assert e.zero_floor_goods == ("g1",)
    assert verify_equilibrium(_capped(m1), e).ok


def test_money_conservation_per_good(m1):
    # Spending on a good equals its price plus its producers' revenue.
    e = solve_market(m1).equilibrium
    p = e.prices
    for g in m1.goods:
        spent = sum(v * p[g] for (a, gg, k), v in e.agent_alloc.items() if gg == g)
        spent += sum(v * p[g] for (f, gg, k), v in e.firm_raw.items() if gg == g)
        revenue = sum(
            e.firm_out[(f.name, gg, k)] * p[f.produces]
            for f in m1.firms
            if f.produces == g
            for (fn, gg, k) in e.firm_out
            if fn == f.name
        )
        assert spent == p[g] + revenue


def test_budget_exactness(m1):
    e = solve_market(m1).equilibrium
    for a in m1.agents:
        earned = sum(w * e.prices[g] for g, w in a.endowment.items())
        earned += sum(s * e.profits[f] for f, s in a.shares.items())
        spent = sum(v * e.prices[g] for (an, g, k), v in e.agent_alloc.items() if an == a.name)
        assert earned == spent


def test_scale_covariance(m1):
    capped = _capped(m1)
    e = solve_market(m1).equilibrium
    for factor in (F(2), F(1, 3), F(7, 5)):
        assert verify_equilibrium(capped, scale_equilibrium(e, factor)).ok


def test_precheck_failure_outcome(isolated_market):
    outcome = solve_market(isolated_market)
    assert outcome.kind == "failure"
    assert outcome.failure.condition == "strong-connectivity"


def test_invalid_market_rejected(m1):
    broken = parse_market(M1_TEXT.replace('"endowment": {"g1": "1"}', '"endowment": {"g1": "2"}'))
    with pytest.raises(InvalidMarketError):
        solve_market(broken)


def test_demand_failure_is_gate_without_waiver(ray_toy):
    outcome = solve_market(ray_toy)
    assert outcome.kind == "failure"
    assert outcome.failure.condition == "enough-demand"


def test_ray_fallback_solves_toy(ray_toy):
    outcome = solve_market(ray_toy, waive_demand=True, check_invariants=True)
    assert outcome.kind == "equilibrium"
    assert outcome.restarts == 1
    e = outcome.equilibrium
    assert e.prices["g3"] == 0
    assert e.prices["g1"] == e.prices["g2"] > 0
    assert e.firm_raw[("f2", "g1", 1)] == 0  # producer of the worthless good idles
    assert verify_equilibrium(_capped(ray_toy), e).ok


def test_verifier_rejects_perturbed_prices(m1):
    # At (2, 11/10) the first segment turns strictly profitable (3*11/10 - 2 >
    # 0), so the held-fixed plan no longer attains the optimum and budgets
    # break; quantities alone still balance, so the failure shows up in the
    # price-bearing clauses.
    capped = _capped(m1)
    e = solve_market(m1).equilibrium
    bad = replace(e, prices={"g1": F(2), "g2": F(11, 10)})
    report = verify_equilibrium(capped, bad)
    assert not report.ok
    clauses = {v.clause for v in report.violations}
    assert clauses & {"production-profit", "production-optimality", "bundle-budget"}


def test_verifier_rejects_underbought_forced_segment(m0):
    capped = _capped(m0)
    e = solve_market(m0).equilibrium
    alloc = dict(e.agent_alloc)
    alloc[("a1", "g2", 1)] -= F(1, 100)
    report = verify_equilibrium(capped, replace(e, agent_alloc=alloc))
    assert not report.ok
    assert any(v.clause in ("bundle-budget", "market-clearing") for v in report.violations)


def test_verifier_rejects_wrong_profit(m1):
    capped = _capped(m1)
    e = solve_market(m1).equilibrium
    report = verify_equilibrium(capped, replace(e, profits={"f1": F(1)}))
    assert any(v.clause == "production-profit" for v in report.violations)


def test_equilibrium_document_round_trip(m1, ray_toy):
    for market, kwargs in ((m1, {}), (ray_toy, {"waive_demand": True})):
        e = solve_market(market, **kwargs).equilibrium
        assert parse_equilibrium(serialize_equilibrium(e)) == e


def test_restrict_market_credit_arithmetic(ray_toy):
    # A surviving firm that could make 2-per-unit from half a unit of a removed
    # good credits exactly 1 unit of its output good, split by shares.
    from splcmarket.equilibrium import SecondaryRayReport, restrict_market
    from splcmarket.formulation import index_variables
    from splcmarket.model import Firm, ProductionSegment

    base = _capped(ray_toy)
    firms = base.firms + (
        Firm(
            name="fX",
            produces="g2",
            inputs={"g3": (ProductionSegment(F(2), F(1, 2)),)},
        ),
    )
    agents = tuple(
        replace(
            a,
            shares={**a.shares, "fX": F(1) if a.name == "a1" else F(0)},
        )
        for a in base.agents
    )
    market = replace(base, firms=firms, agents=agents)
    index = index_variables(market)
    zeros = tuple(F(0) for _ in range(index.n_variables))
    ray = SecondaryRayReport(
        s_goods=("g3",),
        f_firms=("f2",),
        a1_agents=(),
        classification="a1-empty",
        vertex=index.decode(zeros),
        direction=index.decode(zeros),
        vertex_z=F(1),
        direction_z=F(0),
    )
    restricted = restrict_market(market, ray)
    assert restricted.goods == ("g1", "g2")
    assert [f.name for f in restricted.firms] == ["fX"]
    a1 = restricted.agent("a1")
    assert a1.endowment["g2"] == F(0) + 1  # credited 2 * 1/2 = 1 of g2
    a2 = restricted.agent("a2")
    assert a2.endowment["g2"] == F(1)  # no share in fX, only original holding
