"""Shared fixture markets.

m0/m1 are the two hand-solved two-good economies used throughout: agents own
one good each and want the other; a single firm turns g1 into g2.  In m0 the
firm's rate (1/2) never covers its input cost, so it idles and the agents swap
endowments at equal prices.  In m1 the rate is 3 with capacity 1/2, the firm
runs at capacity, and prices settle proportional to (2, 1).
"""

from __future__ import annotations

import pytest

from splcmarket.model import Market, parse_market

M0_TEXT = """{
  "goods": ["g1", "g2"],
  "agents": [
    {"name": "a1", "endowment": {"g1": "1"}, "shares": {"f1": "1"},
     "utility": {"g2": [{"slope": "1"}]}},
    {"name": "a2", "endowment": {"g2": "1"}, "shares": {},
     "utility": {"g1": [{"slope": "1"}]}}
  ],
  "firms": [
    {"name": "f1", "produces": "g2",
     "inputs": {"g1": [{"rate": "1/2", "limit": "1"}]}}
  ]
}"""

M1_TEXT = """{
  "goods": ["g1", "g2"],
  "agents": [
    {"name": "a1", "endowment": {"g1": "1"}, "shares": {"f1": "1"},
     "utility": {"g2": [{"slope": "1"}]}},
    {"name": "a2", "endowment": {"g2": "1"}, "shares": {},
     "utility": {"g1": [{"slope": "1"}]}}
  ],
  "firms": [
    {"name": "f1", "produces": "g2",
     "inputs": {"g1": [{"rate": "3", "limit": "1/2"}, {"rate": "0"}]}}
  ]
}"""

# The two-firm cycle economy: firm A makes one unit of g1 per unit of g2,
# firm B makes two units of g2 per unit of g1, so chaining them creates g2
# out of nothing (cycle product 2).
CYCLE_TEXT = """{
  "goods": ["g1", "g2"],
  "agents": [
    {"name": "a1", "endowment": {"g1": "1", "g2": "1"},
     "shares": {"fA": "1", "fB": "1"},
     "utility": {"g1": [{"slope": "2"}], "g2": [{"slope": "1"}]}}
  ],
  "firms": [
    {"name": "fA", "produces": "g1", "inputs": {"g2": [{"rate": "1"}]}},
    {"name": "fB", "produces": "g2", "inputs": {"g1": [{"rate": "2"}]}}
  ]
}"""

# Two agents who each own and want only their own good: no trade edges at all.
ISOLATED_TEXT = """{
  "goods": ["g1", "g2"],
  "agents": [
    {"name": "a1", "endowment": {"g1": "1"}, "shares": {},
     "utility": {"g1": [{"slope": "1"}]}},
    {"name": "a2", "endowment": {"g2": "1"}, "shares": {},
     "utility": {"g2": [{"slope": "1"}]}}
  ],
  "firms": []
}"""

# g3 is endowed but desired by nobody, and f2 would turn g1 into more of it:
# no equilibrium with a positive g3 price exists, so the pivot path must end
# on a secondary ray whose constant-price set is exactly {g3}.
RAY_TOY_TEXT = """{
  "goods": ["g1", "g2", "g3"],
  "agents": [
    {"name": "a1", "endowment": {"g1": "1"}, "shares": {"f2": "1"},
     "utility": {"g2": [{"slope": "1"}]}},
    {"name": "a2", "endowment": {"g2": "1", "g3": "1"}, "shares": {},
     "utility": {"g1": [{"slope": "1"}]}}
  ],
  "firms": [
    {"name": "f2", "produces": "g3",
     "inputs": {"g1": [{"rate": "1/2", "limit": "1"}]}}
  ]
}"""

M0_EXCHANGE_TEXT = """{
  "goods": ["g1", "g2"],
  "agents": [
    {"name": "a1", "endowment": {"g1": "1"}, "shares": {},
     "utility": {"g2": [{"slope": "1"}]}},
    {"name": "a2", "endowment": {"g2": "1"}, "shares": {},
     "utility": {"g1": [{"slope": "1"}]}}
  ],
  "firms": []
}"""


@pytest.fixture
def m0() -> Market:
    return parse_market(M0_TEXT)


@pytest.fixture
def m1() -> Market:
    return parse_market(M1_TEXT)


@pytest.fixture
def cycle_market() -> Market:
    return parse_market(CYCLE_TEXT)


@pytest.fixture
def isolated_market() -> Market:
    return parse_market(ISOLATED_TEXT)


@pytest.fixture
def ray_toy() -> Market:
    return parse_market(RAY_TOY_TEXT)


@pytest.fixture
def m0_exchange() -> Market:
    return parse_market(M0_EXCHANGE_TEXT)
