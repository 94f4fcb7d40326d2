"""Market data model: SPLC utilities, SPLC production, and the canonical file format.

Every number in the model is an exact ``fractions.Fraction``; no float enters the
system at any point.  Markets are immutable after construction and are built
either programmatically or by :func:`parse_market` from the canonical JSON
format (all rationals encoded as strings ``"p"`` or ``"p/q"``).

Structural invariants (strictly decreasing slopes, share/endowment sums, segment
placement) are checked by :func:`validate_market`, which reports violations
rather than raising.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

__all__ = [
    "UtilitySegment",
    "ProductionSegment",
    "Agent",
    "Firm",
    "Market",
    "MarketParseError",
    "Violation",
    "ValidationReport",
    "parse_market",
    "serialize_market",
    "validate_market",
    "rational_to_str",
    "rational_from_str",
]

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/[1-9]\d*)?$")


class MarketParseError(ValueError):
    """Raised when a market document is malformed."""


def rational_from_str(text: object, where: str = "") -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` into an exact Fraction; reject anything else.

    Floats and bare JSON numbers are rejected so that no rounding can sneak in
    through the file format.
    """
    if not isinstance(text, str):
        raise MarketParseError(
            f"malformed rational at {where or '?'}: expected string, got {type(text).__name__} ({text!r})"
        )
    if not _RATIONAL_RE.match(text):
        raise MarketParseError(f"malformed rational at {where or '?'}: {text!r}")
    return Fraction(text)


def rational_to_str(value: Fraction) -> str:
    """Format a Fraction as ``"p"`` or ``"p/q"`` (lowest terms, positive denominator)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class UtilitySegment:
    """One linear piece of a one-good utility function.

    ``slope`` is utility per unit of the good; ``length`` is the amount of the
    good the segment spans, or ``None`` for the unbounded last segment.
    """

    slope: Fraction
    length: Fraction | None = None


@dataclass(frozen=True)
class ProductionSegment:
    """One linear piece of a one-input production function.

    ``rate`` is output good per unit of input good; ``limit`` is the input
    amount usable at that rate, or ``None`` for the unbounded last segment.
    """

    rate: Fraction
    limit: Fraction | None = None


@dataclass(frozen=True)
class Agent:
    name: str
    endowment: dict[str, Fraction]
    shares: dict[str, Fraction]
    utility: dict[str, tuple[UtilitySegment, ...]]


@dataclass(frozen=True)
class Firm:
    name: str
    produces: str
    inputs: dict[str, tuple[ProductionSegment, ...]]


@dataclass(frozen=True)
class Market:
    goods: tuple[str, ...]
    agents: tuple[Agent, ...]
    firms: tuple[Firm, ...]

    def agent(self, name: str) -> Agent:
        for a in self.agents:
            if a.name == name:
                return a
        raise KeyError(name)

    def firm(self, name: str) -> Firm:
        for f in self.firms:
            if f.name == name:
                return f
        raise KeyError(name)

    def utility_segments(self) -> Iterator[tuple[str, str, int, UtilitySegment]]:
        """Yield (agent, good, k, segment) in canonical order; k is 1-based."""
        for a in self.agents:
            for g in self.goods:
                for k, seg in enumerate(a.utility.get(g, ()), start=1):
                    yield a.name, g, k, seg

    def production_segments(self) -> Iterator[tuple[str, str, int, ProductionSegment]]:
        """Yield (firm, input good, k, segment) in canonical order; k is 1-based."""
        for f in self.firms:
            for g in self.goods:
                for k, seg in enumerate(f.inputs.get(g, ()), start=1):
                    yield f.name, g, k, seg

    def total_endowment(self, good: str) -> Fraction:
        return sum((a.endowment.get(good, Fraction(0)) for a in self.agents), Fraction(0))

    def producers_of(self, good: str) -> tuple[Firm, ...]:
        return tuple(f for f in self.firms if f.produces == good)


# ---------------------------------------------------------------------------
# Canonical format


def _reject_float(value: str) -> None:
    raise MarketParseError(f"float literal {value!r} not allowed; use rational strings")


def _parse_segment_list(
    raw: object,
    where: str,
    slope_key: str,
    bound_key: str,
) -> tuple[tuple[Fraction, Fraction | None], ...]:
    if not isinstance(raw, list) or not raw:
        raise MarketParseError(f"{where}: expected a non-empty list of segments")
    segs = []
    for k, obj in enumerate(raw, start=1):
        if not isinstance(obj, dict):
            raise MarketParseError(f"{where}[{k}]: expected a segment object")
        unknown = set(obj) - {slope_key, bound_key}
        if unknown:
            raise MarketParseError(f"{where}[{k}]: unknown keys {sorted(unknown)}")
        if slope_key not in obj:
            raise MarketParseError(f"{where}[{k}]: missing {slope_key!r}")
        slope = rational_from_str(obj[slope_key], f"{where}[{k}].{slope_key}")
        bound = None
        if bound_key in obj:
            bound = rational_from_str(obj[bound_key], f"{where}[{k}].{bound_key}")
        segs.append((slope, bound))
    return tuple(segs)


def _parse_rational_map(raw: object, where: str, valid_keys: set[str], kind: str) -> dict[str, Fraction]:
    if not isinstance(raw, dict):
        raise MarketParseError(f"{where}: expected an object")
    out: dict[str, Fraction] = {}
    for key, val in raw.items():
        if key not in valid_keys:
            raise MarketParseError(f"{where}: unknown {kind} {key!r}")
        out[key] = rational_from_str(val, f"{where}.{key}")
    return out


def parse_market(text: str | bytes) -> Market:
    """Parse the canonical market document.  Validation is *not* applied here.

    Raises :class:`MarketParseError` with position info on syntax errors and
    with a path on malformed rationals or unknown good/firm references.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text, parse_float=_reject_float)
    except MarketParseError:
        raise
    except json.JSONDecodeError as exc:
        raise MarketParseError(f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise MarketParseError("top level must be an object")
    unknown = set(doc) - {"goods", "agents", "firms"}
    if unknown:
        raise MarketParseError(f"unknown top-level keys {sorted(unknown)}")

    goods_raw = doc.get("goods")
    if not isinstance(goods_raw, list) or not all(isinstance(g, str) for g in goods_raw):
        raise MarketParseError("'goods' must be a list of strings")
    goods = tuple(goods_raw)
    good_set = set(goods)
    if len(good_set) != len(goods):
        raise MarketParseError("duplicate good name")

    firms_raw = doc.get("firms", [])
    if not isinstance(firms_raw, list):
        raise MarketParseError("'firms' must be a list")
    firm_names: list[str] = []
    firms: list[Firm] = []
    for fobj in firms_raw:
        if not isinstance(fobj, dict):
            raise MarketParseError("firm entries must be objects")
        unknown = set(fobj) - {"name", "produces", "inputs"}
        if unknown:
            raise MarketParseError(f"firm: unknown keys {sorted(unknown)}")
        name = fobj.get("name")
        if not isinstance(name, str) or not name:
            raise MarketParseError("firm without a name")
        if name in firm_names:
            raise MarketParseError(f"duplicate firm name {name!r}")
        firm_names.append(name)
        produces = fobj.get("produces")
        if produces not in good_set:
            raise MarketParseError(f"firm {name!r}: unknown good {produces!r}")
        inputs_raw = fobj.get("inputs", {})
        if not isinstance(inputs_raw, dict):
            raise MarketParseError(f"firm {name!r}: 'inputs' must be an object")
        inputs: dict[str, tuple[ProductionSegment, ...]] = {}
        for g, seglist in inputs_raw.items():
            if g not in good_set:
                raise MarketParseError(f"firm {name!r}: unknown good {g!r}")
            pairs = _parse_segment_list(seglist, f"firm {name!r} inputs.{g}", "rate", "limit")
            inputs[g] = tuple(ProductionSegment(rate, lim) for rate, lim in pairs)
        firms.append(Firm(name=name, produces=produces, inputs=inputs))
    firm_set = set(firm_names)

    agents_raw = doc.get("agents")
    if not isinstance(agents_raw, list) or not agents_raw:
        raise MarketParseError("'agents' must be a non-empty list")
    agent_names: list[str] = []
    agents: list[Agent] = []
    for aobj in agents_raw:
        if not isinstance(aobj, dict):
            raise MarketParseError("agent entries must be objects")
        unknown = set(aobj) - {"name", "endowment", "shares", "utility"}
        if unknown:
            raise MarketParseError(f"agent: unknown keys {sorted(unknown)}")
        name = aobj.get("name")
        if not isinstance(name, str) or not name:
            raise MarketParseError("agent without a name")
        if name in agent_names:
            raise MarketParseError(f"duplicate agent name {name!r}")
        agent_names.append(name)
        endowment = _parse_rational_map(aobj.get("endowment", {}), f"agent {name!r} endowment", good_set, "good")
        shares = _parse_rational_map(aobj.get("shares", {}), f"agent {name!r} shares", firm_set, "firm")
        utility_raw = aobj.get("utility", {})
        if not isinstance(utility_raw, dict):
            raise MarketParseError(f"agent {name!r}: 'utility' must be an object")
        utility: dict[str, tuple[UtilitySegment, ...]] = {}
        for g, seglist in utility_raw.items():
            if g not in good_set:
                raise MarketParseError(f"agent {name!r}: unknown good {g!r}")
            pairs = _parse_segment_list(seglist, f"agent {name!r} utility.{g}", "slope", "length")
            utility[g] = tuple(UtilitySegment(slope, length) for slope, length in pairs)
        agents.append(Agent(name=name, endowment=endowment, shares=shares, utility=utility))

    return Market(goods=goods, agents=tuple(agents), firms=tuple(firms))


def _segment_obj(slope_key: str, bound_key: str, slope: Fraction, bound: Fraction | None) -> dict:
    obj = {slope_key: rational_to_str(slope)}
    if bound is not None:
        obj[bound_key] = rational_to_str(bound)
    return obj


def serialize_market(m: Market) -> str:
    """Render a market in the canonical format; ``parse_market`` inverts this exactly."""
    doc = {
        "goods": list(m.goods),
        "agents": [
            {
                "name": a.name,
                "endowment": {g: rational_to_str(a.endowment[g]) for g in m.goods if g in a.endowment},
                "shares": {f.name: rational_to_str(a.shares[f.name]) for f in m.firms if f.name in a.shares},
                "utility": {
                    g: [_segment_obj("slope", "length", s.slope, s.length) for s in a.utility[g]]
                    for g in m.goods
                    if g in a.utility
                },
            }
            for a in m.agents
        ],
        "firms": [
            {
                "name": f.name,
                "produces": f.produces,
                "inputs": {
                    g: [_segment_obj("rate", "limit", s.rate, s.limit) for s in f.inputs[g]]
                    for g in m.goods
                    if g in f.inputs
                },
            }
            for f in m.firms
        ],
    }
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    code: str
    where: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"{v.code} [{v.where}]: {v.message}" for v in self.violations)


def _check_segments(
    out: list[Violation],
    where: str,
    slopes: list[Fraction],
    bounds: list[Fraction | None],
    kind: str,
) -> None:
    for s in slopes:
        if s < 0:
            out.append(Violation(f"negative-{kind}", where, f"{kind} {rational_to_str(s)} < 0"))
    for prev, cur in zip(slopes, slopes[1:]):
        if prev <= cur:
            out.append(
                Violation(
                    f"{kind}s-not-strictly-decreasing",
                    where,
                    f"{kind}s not strictly decreasing: {rational_to_str(prev)} then {rational_to_str(cur)}",
                )
            )
    for k, b in enumerate(bounds, start=1):
        if b is None and k != len(bounds):
            out.append(Violation("unbounded-not-last", where, f"segment {k} is unbounded but not last"))
        if b is not None and b < 0:
            out.append(Violation("negative-length", where, f"segment {k} has negative extent"))


def validate_market(m: Market) -> ValidationReport:
    """Check every structural invariant; never mutates, never raises on violations."""
    out: list[Violation] = []
    good_set = set(m.goods)
    firm_set = {f.name for f in m.firms}

    for a in m.agents:
        for g, amount in a.endowment.items():
            if g not in good_set:
                out.append(Violation("unknown-good", f"agent {a.name}", f"endowment references {g!r}"))
            if amount < 0:
                out.append(Violation("negative-endowment", f"agent {a.name}", f"endowment of {g} is negative"))
        for f, share in a.shares.items():
            if f not in firm_set:
                out.append(Violation("unknown-firm", f"agent {a.name}", f"shares reference {f!r}"))
            if share < 0:
                out.append(Violation("negative-share", f"agent {a.name}", f"share of {f} is negative"))
        for g, segs in a.utility.items():
            if g not in good_set:
                out.append(Violation("unknown-good", f"agent {a.name}", f"utility references {g!r}"))
            _check_segments(
                out,
                f"agent {a.name} utility {g}",
                [s.slope for s in segs],
                [s.length for s in segs],
                "slope",
            )

    for f in m.firms:
        if f.produces not in good_set:
            out.append(Violation("unknown-good", f"firm {f.name}", f"produces {f.produces!r}"))
        for g, segs in f.inputs.items():
            if g not in good_set:
                out.append(Violation("unknown-good", f"firm {f.name}", f"inputs reference {g!r}"))
            if g == f.produces:
                out.append(
                    Violation(
                        "input-output-not-disjoint",
                        f"firm {f.name}",
                        f"{g} is both produced and used as input",
                    )
                )
            _check_segments(
                out,
                f"firm {f.name} input {g}",
                [s.rate for s in segs],
                [s.limit for s in segs],
                "rate",
            )

    for g in m.goods:
        total = m.total_endowment(g)
        if total == 1:
            continue
        if total == 0 and m.producers_of(g):
            continue
        out.append(
            Violation(
                "endowment-sum",
                f"good {g}",
                f"endowments sum to {rational_to_str(total)}, expected 1 (or 0 for a produced good)",
            )
        )

    for f in m.firms:
        total = sum((a.shares.get(f.name, Fraction(0)) for a in m.agents), Fraction(0))
        if total != 1:
            out.append(
                Violation(
                    "share-sum",
                    f"firm {f.name}",
                    f"shares of firm do not sum to 1 (got {rational_to_str(total)})",
                )
            )

    return ValidationReport(tuple(out))
