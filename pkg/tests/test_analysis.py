from fractions import Fraction

import pytest

from splcmarket import analysis
from splcmarket.analysis import (
    PreconditionError,
    check_enough_demand,
    check_no_production_out_of_nothing,
    check_strong_connectivity,
    compute_price_floor,
    compute_production_bound,
    desire,
    production_graph,
)
from splcmarket.harness import GenParams, generate_random_market
from splcmarket.model import Market, parse_market

from conftest import CYCLE_TEXT, M1_TEXT


# -- no production out of nothing -------------------------------------------


def test_two_firm_cycle_rejected(cycle_market):
    report = check_no_production_out_of_nothing(cycle_market)
    assert not report.passed
    assert set(report.witness["cycle"]) == {"g1", "g2"}
    assert Fraction(report.witness["product"]) == 2


def test_acyclic_market_passes(m1):
    assert check_no_production_out_of_nothing(m1).passed


def test_contracting_cycle_passes():
    text = CYCLE_TEXT.replace('"rate": "1"', '"rate": "1/2"').replace('"rate": "2"', '"rate": "1"')
    report = check_no_production_out_of_nothing(parse_market(text))
    assert report.passed  # single cycle with product 1/2 < 1


def test_vacuous_cycle_product_one_fails():
    text = CYCLE_TEXT.replace('"rate": "2"', '"rate": "1"')
    report = check_no_production_out_of_nothing(parse_market(text))
    assert not report.passed
    assert Fraction(report.witness["product"]) == 1


def test_cycle_check_invariant_under_renaming(cycle_market):
    swapped = parse_market(
        CYCLE_TEXT.replace("g1", "tmp").replace("g2", "g1").replace("tmp", "g2")
    )
    assert check_no_production_out_of_nothing(swapped).passed == check_no_production_out_of_nothing(cycle_market).passed


# -- strong connectivity ------------------------------------------------------


def test_swap_market_connected(m0):
    assert check_strong_connectivity(m0).passed


def test_isolated_agents_fail_with_witness(isolated_market):
    report = check_strong_connectivity(isolated_market)
    assert not report.passed
    witness = set(report.witness["agents"])
    assert witness and witness < {"a1", "a2"}


def test_single_agent_trivially_connected():
    m = parse_market(
        '{"goods": ["g1"], "agents": [{"name": "a1", "endowment": {"g1": "1"},'
        ' "shares": {}, "utility": {"g1": [{"slope": "1"}]}}], "firms": []}'
    )
    assert check_strong_connectivity(m).passed


# -- enough demand ------------------------------------------------------------


def test_m1_demand_after_capping(m1):
    _, capped = compute_production_bound(m1)
    assert desire(capped, "g1") == 65
    assert desire(capped, "g2") == 65
    assert check_enough_demand(capped).passed


def test_undesired_good_fails(ray_toy):
    _, capped = compute_production_bound(ray_toy)
    report = check_enough_demand(capped)
    assert not report.passed
    assert report.witness["goods"] == [{"good": "g3", "desire": "0"}]


def test_desire_boundary_is_strict(m0):
    # One bounded segment of length exactly 1: desire(g2) = 1 is not enough.
    text = (
        '{"goods": ["g1", "g2"], "agents": ['
        '{"name": "a1", "endowment": {"g1": "1"}, "shares": {}, "utility": {"g2": [{"slope": "1", "length": "1"}]}},'
        '{"name": "a2", "endowment": {"g2": "1"}, "shares": {}, "utility": {"g1": [{"slope": "1"}]}}'
        '], "firms": []}'
    )
    _, capped = compute_production_bound(parse_market(text))
    report = check_enough_demand(capped)
    assert not report.passed
    assert report.witness["goods"][0]["good"] == "g2"


def test_desire_monotone_in_segments(m1):
    _, capped = compute_production_bound(m1)
    base = desire(capped, "g1")
    richer = parse_market(
        M1_TEXT.replace(
            '"utility": {"g1": [{"slope": "1"}]}',
            '"utility": {"g1": [{"slope": "2", "length": "1"}, {"slope": "1"}]}',
        )
    )
    _, capped_richer = compute_production_bound(richer)
    assert desire(capped_richer, "g1") >= base


# -- production bound and caps -----------------------------------------------


def test_m1_caps(m1):
    big_l, capped = compute_production_bound(m1)
    assert big_l == 64  # 2^2 * (3+1)^2
    assert capped.agents[0].utility["g2"][0].length == 65
    assert capped.firms[0].inputs["g1"][1].limit == Fraction(64, 3)
    assert capped.firms[0].inputs["g1"][0].limit == Fraction(1, 2)  # bounded stays


def test_bound_without_firms(m0_exchange):
    big_l, capped = compute_production_bound(m0_exchange)
    assert big_l == 4  # 2^2 * 1^2
    assert capped.agents[0].utility["g2"][0].length == 5


def test_capping_fully_bounded_market_is_identity(m0_exchange):
    bounded = Market(
        goods=m0_exchange.goods,
        agents=tuple(
            a.__class__(
                name=a.name,
                endowment=a.endowment,
                shares=a.shares,
                utility={
                    g: tuple(s.__class__(s.slope, Fraction(2)) for s in segs)
                    for g, segs in a.utility.items()
                },
            )
            for a in m0_exchange.agents
        ),
        firms=(),
    )
    _, capped = compute_production_bound(bounded)
    assert capped == bounded


# -- price floor ---------------------------------------------------------------


def test_floor_m1(m1):
    floor = compute_price_floor(m1)
    assert floor.prices == {"g1": Fraction(27, 4), "g2": Fraction(3, 2)}
    assert floor.delta == Fraction(1, 2)


def test_floor_without_firms(m0_exchange):
    floor = compute_price_floor(m0_exchange)
    assert floor.prices == {"g1": Fraction(3, 2), "g2": Fraction(3, 2)}


def test_floor_chain():
    # One firm makes g3 from g2, another makes g2 from g1, both at rate 1.
    text = (
        '{"goods": ["g1", "g2", "g3"], "agents": ['
        '{"name": "a1", "endowment": {"g1": "1", "g2": "1", "g3": "1"},'
        ' "shares": {"fA": "1", "fB": "1"},'
        ' "utility": {"g1": [{"slope": "1"}]}}], "firms": ['
        '{"name": "fA", "produces": "g3", "inputs": {"g2": [{"rate": "1"}]}},'
        '{"name": "fB", "produces": "g2", "inputs": {"g1": [{"rate": "1"}]}}]}'
    )
    floor = compute_price_floor(parse_market(text))
    assert floor.prices == {
        "g1": Fraction(27, 8),
        "g2": Fraction(9, 4),
        "g3": Fraction(3, 2),
    }


def test_floor_rejects_cycle(cycle_market):
    with pytest.raises(PreconditionError):
        compute_price_floor(cycle_market)


def test_floor_strictness_on_random_markets():
    for seed in range(20):
        m = generate_random_market(GenParams(3, 4, 3, 2, seed=seed))
        floor = compute_price_floor(m)
        for g, value in floor.prices.items():
            assert value > 1
        for e in production_graph(m).edges:
            assert e.multiplier * floor.prices[e.output_good] < floor.prices[e.input_good]


def test_profitable_edge_set_empty_at_floor(m1):
    floor = compute_price_floor(m1)
    profitable = [
        e
        for e in production_graph(m1).edges
        if e.multiplier * floor.prices[e.output_good] >= floor.prices[e.input_good]
    ]
    assert profitable == []
