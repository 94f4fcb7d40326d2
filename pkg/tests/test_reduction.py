from fractions import Fraction as F

import pytest

from splcmarket import analysis
from splcmarket.equilibrium import (
    normalize_equilibrium,
    solve_market,
    verify_equilibrium,
)
from splcmarket.harness import GenParams, generate_random_market
from splcmarket.model import Market, parse_market, validate_market
from splcmarket.reduction import (
    exchange_to_production,
    lift_exchange_equilibrium,
    project_equilibrium,
)


def test_construction_counts(m0_exchange):
    reduced, rmap = exchange_to_production(m0_exchange)
    assert len(reduced.goods) == 4
    assert len(reduced.firms) == 2
    assert len(reduced.agents) == 2
    assert validate_market(reduced).ok
    # Synthetic goods are produced only; originals keep their endowments.
    for agent in reduced.agents:
        synth = rmap.utility_good[agent.name]
        assert reduced.total_endowment(synth) == 0
        assert len(agent.utility) == 1 and synth in agent.utility


def test_segments_copied_one_to_one():
    text = (
        '{"goods": ["g1"], "agents": ['
        '{"name": "a1", "endowment": {"g1": "1"}, "shares": {}, "utility": {"g1": ['
        '{"slope": "3", "length": "1/4"}, {"slope": "2", "length": "1/2"}, {"slope": "1"}]}}'
        '], "firms": []}'
    )
    m = parse_market(text)
    reduced, rmap = exchange_to_production(m)
    firm = reduced.firm(rmap.utility_firm["a1"])
    segs = firm.inputs["g1"]
    assert [(s.rate, s.limit) for s in segs] == [
        (F(3), F(1, 4)),
        (F(2), F(1, 2)),
        (F(1), None),
    ]


def test_reduction_rejects_production_markets(m1):
    with pytest.raises(ValueError):
        exchange_to_production(m1)


def test_reduced_market_fails_demand_on_original_goods(m0_exchange):
    reduced, rmap = exchange_to_production(m0_exchange)
    _, capped = analysis.compute_production_bound(reduced)
    report = analysis.check_enough_demand(capped)
    assert not report.passed
    weak = {entry["good"] for entry in report.witness["goods"]}
    assert weak == set(rmap.original_goods)


def test_project_m0_exchange(m0_exchange):
    reduced, rmap = exchange_to_production(m0_exchange)
    outcome = solve_market(reduced, waive_demand=True, check_invariants=True)
    assert outcome.kind == "equilibrium"
    projected = project_equilibrium(rmap, outcome.equilibrium)
    norm = normalize_equilibrium(projected, "g1")
    assert norm.prices == {"g1": F(1), "g2": F(1)}
    assert projected.agent_alloc[("a1", "g2", 1)] == 1
    assert projected.agent_alloc[("a2", "g1", 1)] == 1


def test_direct_and_reduced_agree(m0_exchange):
    direct = solve_market(m0_exchange, check_invariants=True).equilibrium
    reduced, rmap = exchange_to_production(m0_exchange)
    projected = project_equilibrium(
        rmap, solve_market(reduced, waive_demand=True).equilibrium
    )
    n_direct = normalize_equilibrium(direct, "g1")
    n_projected = normalize_equilibrium(projected, "g1")
    assert n_direct.prices == n_projected.prices
    assert n_direct.agent_alloc == n_projected.agent_alloc


def test_projected_equilibrium_verifies_on_exchange_market(m0_exchange):
    reduced, rmap = exchange_to_production(m0_exchange)
    projected = project_equilibrium(
        rmap, solve_market(reduced, waive_demand=True).equilibrium
    )
    _, capped = analysis.compute_production_bound(m0_exchange)
    assert verify_equilibrium(capped, projected).ok


def test_reverse_lift_verifies_on_reduced_market():
    m = generate_random_market(GenParams(2, 2, 0, 2, seed=11))
    e = solve_market(m, check_invariants=True).equilibrium
    reduced, rmap = exchange_to_production(m)
    _, capped_reduced = analysis.compute_production_bound(reduced)
    lifted = lift_exchange_equilibrium(rmap, analysis.compute_production_bound(m)[1], e)
    assert verify_equilibrium(capped_reduced, lifted).ok


def test_single_agent_identity_projection():
    m = parse_market(
        '{"goods": ["g1"], "agents": [{"name": "a1", "endowment": {"g1": "1"},'
        ' "shares": {}, "utility": {"g1": [{"slope": "1"}]}}], "firms": []}'
    )
    reduced, rmap = exchange_to_production(m)
    outcome = solve_market(reduced, waive_demand=True)
    projected = project_equilibrium(rmap, outcome.equilibrium)
    assert set(projected.prices) == {"g1"}
    assert projected.agent_alloc[("a1", "g1", 1)] == 1
