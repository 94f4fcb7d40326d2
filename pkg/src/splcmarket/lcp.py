"""Market-agnostic Lemke complementary-pivot engine over exact rationals.

Solves ``find y >= 0 with  M y <= q  and  y . (q - M y) = 0`` by following the
complementary path from the primary ray of the augmented system
``M y + v - z a = q`` (``a`` is the covering vector, 1 exactly on rows with a
negative right-hand side).  The path ends either with ``z`` leaving the basis
(a solution) or on an unbounded edge (a secondary ray).

Implementation notes
--------------------
The tableau is kept fraction-free with one positive integer denominator per
row: the true rational row is ``tableau[i] / row_den[i]``.  A pivot updates a
row by cross-multiplication only (no division step whose exactness would need
an argument), then strips the row's content with one gcd pass, which keeps
entries at the size of the underlying minors.  Row scaling by a positive
factor changes neither ratio tests, complementarity, nor basic-variable
values, so all comparisons cross-multiply within and across rows.

Degeneracy is resolved by the lexicographic ratio test over the slack-column
block, which doubles as the perturbation matrix: the block starts as a
positive diagonal and stays row-independent, so ties always break and no
basis can repeat.  The initial pivot row is the *last* index attaining
``max(-q_i)``, which keeps every tableau row lexico-positive from the start.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Sequence

import numpy as np

try:
    from gmpy2 import gcd as _gcd, mpz as _int
except ImportError:  # pragma: no cover - gmpy2 is a hard dependency, int works too
    _int = int
    _gcd = gcd

__all__ = [
    "LcpInstance",
    "PivotState",
    "Solution",
    "SecondaryRay",
    "IterationLimit",
    "LcpOutcome",
    "standard_covering",
    "augment",
    "pivot_step",
    "lemke_solve",
    "verify_lcp_solution",
    "enumerate_complementary_solutions",
]

DEFAULT_MAX_ITERATIONS = 10**6


@dataclass(frozen=True)
class LcpInstance:
    """Dense LCP data: matrix rows, right-hand side q, and the z covering vector."""

    matrix: tuple[tuple[Fraction, ...], ...]
    q: tuple[Fraction, ...]
    covering: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.q)


def standard_covering(q: Sequence[Fraction]) -> tuple[int, ...]:
    """Covering vector with a 1 exactly where q is negative."""
    return tuple(1 if qi < 0 else 0 for qi in q)


@dataclass(frozen=True)
class Solution:
    y: tuple[Fraction, ...]
    iterations: int


@dataclass(frozen=True)
class SecondaryRay:
    """Unbounded complementary edge with z > 0 at its vertex."""

    vertex_y: tuple[Fraction, ...]
    vertex_z: Fraction
    direction_y: tuple[Fraction, ...]
    direction_z: Fraction
    iterations: int


@dataclass(frozen=True)
class IterationLimit:
    state: "PivotState"
    iterations: int


LcpOutcome = Solution | SecondaryRay | IterationLimit


class PivotState:
    """Mutable tableau state; one pivot at a time.

    Labels: ``0..n-1`` are the y variables, ``n..2n-1`` the slacks v, ``2n`` is z.
    Column ``2n+1`` of the tableau is the right-hand side.
    """

    def __init__(self, instance: LcpInstance):
        n = instance.n
        self.n = n
        self.instance = instance
        cols = 2 * n + 2
        tab = np.empty((n, cols), dtype=object)
        for i in range(n):
            scale = 1
            for value in instance.matrix[i]:
                scale = scale * value.denominator // gcd(scale, value.denominator)
            qd = instance.q[i].denominator
            scale = scale * qd // gcd(scale, qd)
            s = _int(scale)
            for j, value in enumerate(instance.matrix[i]):
                tab[i, j] = _int(value.numerator) * _int(scale // value.denominator)
            for j in range(n, cols):
                tab[i, j] = _int(0)
            tab[i, n + i] = s
            tab[i, 2 * n] = -s if instance.covering[i] else _int(0)
            tab[i, 2 * n + 1] = _int(instance.q[i].numerator) * _int(scale // instance.q[i].denominator)
        self.tableau = tab
        self.row_den: list = [_int(1)] * n
        self.basis: list[int] = [n + i for i in range(n)]
        self.double_label: int | None = None
        self.next_entering: int | None = None
        self.iterations = 0
        self.finished = False
        self.ray_column: int | None = None
        for i in range(n):
            self._reduce_row(i)

    # -- helpers ------------------------------------------------------------

    def label_name(self, label: int) -> str:
        if label == 2 * self.n:
            return "z"
        if label >= self.n:
            return f"v{label - self.n + 1}"
        return f"y{label + 1}"

    def value_of(self, label: int) -> Fraction:
        for row, basic in enumerate(self.basis):
            if basic == label:
                return Fraction(int(self.tableau[row, 2 * self.n + 1]), int(self.row_den[row]))
        return Fraction(0)

    def z_value(self) -> Fraction:
        return self.value_of(2 * self.n)

    def solution_y(self) -> tuple[Fraction, ...]:
        y = [Fraction(0)] * self.n
        rhs = 2 * self.n + 1
        for row, basic in enumerate(self.basis):
            if basic < self.n:
                y[basic] = Fraction(int(self.tableau[row, rhs]), int(self.row_den[row]))
        return tuple(y)

    def _reduce_row(self, i: int) -> None:
        g = self.row_den[i]
        if g == 1:
            return
        for value in self.tableau[i]:
            if value:
                g = _gcd(g, value)
                if g == 1:
                    return
        self.tableau[i] //= g
        self.row_den[i] //= g

    def _pivot(self, row: int, col: int) -> None:
        """Cross-multiplication pivot; rows untouched by the column are skipped.

        Row i picks up denominator row_den[i] * pivot and is immediately
        reduced by its content, so entries stay at true minor size without any
        exact-division assumption."""
        tab = self.tableau
        piv = tab[row, col]
        pivot_row = tab[row].copy()
        column = tab[:, col].copy()
        neg = piv < 0
        for i in range(self.n):
            if i == row:
                continue
            factor = column[i]
            if factor == 0:
                continue
            updated = tab[i] * piv - factor * pivot_row
            if neg:
                np.negative(updated, out=updated)
            tab[i] = updated
            self.row_den[i] *= -piv if neg else piv
            self._reduce_row(i)
        if neg:
            np.negative(tab[row], out=tab[row])
            piv = -piv
        self.row_den[row] = piv
        self._reduce_row(row)
        self.iterations += 1

    def _lexico_leaving_row(self, col: int) -> int | None:
        """Smallest ratio rhs/entry over rows with a positive entry; ties broken
        lexicographically over the slack-column block.  None means unbounded."""
        tab = self.tableau
        n = self.n
        rhs = 2 * n + 1
        best = -1
        for i in range(n):
            if tab[i, col] <= 0:
                continue
            if best < 0:
                best = i
                continue
            a_den = tab[i, col]
            b_den = tab[best, col]
            cmp = tab[i, rhs] * b_den - tab[best, rhs] * a_den
            if cmp == 0:
                for k in range(n, 2 * n):
                    cmp = tab[i, k] * b_den - tab[best, k] * a_den
                    if cmp != 0:
                        break
                else:
                    raise RuntimeError("lexicographic tie: perturbation block degenerate")
            if cmp < 0:
                best = i
        return best if best >= 0 else None


def augment(instance: LcpInstance) -> PivotState:
    """Bring z into the basis at ``z = max(-q_i)`` over covered rows.

    The leaving slack's index becomes the double label; its y variable is the
    first entering variable of the pivot path.  Caller must ensure q has a
    negative entry (otherwise y = 0 already solves the instance).
    """
    n = instance.n
    for i in range(n):
        if instance.q[i] < 0 and not instance.covering[i]:
            raise ValueError(f"covering vector misses negative q row {i}")
    candidates = [i for i in range(n) if instance.covering[i] and instance.q[i] < 0]
    if not candidates:
        raise ValueError("q >= 0: trivial solution, nothing to augment")
    # Last index attaining the max keeps all rows lexico-positive after the pivot.
    row = max(candidates, key=lambda i: (-instance.q[i], i))
    state = PivotState(instance)
    state._pivot(row, 2 * n)
    state.basis[row] = 2 * n
    state.double_label = row
    state.next_entering = row
    return state


def pivot_step(state: PivotState, trace: Callable[[str], None] | None = None) -> str:
    """Perform one complementary pivot.

    Returns "solution" when z left the basis, "ray" when the entering column
    is unbounded, else "continue".  The entering variable is the complement of
    the variable that left on the previous pivot.
    """
    if state.finished:
        raise RuntimeError("pivoting on a finished state")
    entering = state.next_entering
    if entering is None:
        raise RuntimeError("no entering variable: state has no double label")
    col = entering
    row = state._lexico_leaving_row(col)
    if row is None:
        state.finished = True
        state.ray_column = col
        if trace:
            trace(f"step {state.iterations + 1}: enter {state.label_name(entering)} unbounded (secondary ray)")
        return "ray"
    leaving = state.basis[row]
    state._pivot(row, col)
    state.basis[row] = entering
    if trace:
        trace(
            f"step {state.iterations}: enter {state.label_name(entering)}"
            f" leave {state.label_name(leaving)} z={state.z_value()}"
        )
    if leaving == 2 * state.n:
        state.finished = True
        state.double_label = None
        state.next_entering = None
        return "solution"
    pair = leaving if leaving < state.n else leaving - state.n
    state.double_label = pair
    state.next_entering = leaving + state.n if leaving < state.n else leaving - state.n
    return "continue"


def _ray_outcome(state: PivotState) -> SecondaryRay:
    n = state.n
    col = state.ray_column
    assert col is not None
    vertex = [Fraction(0)] * n
    direction = [Fraction(0)] * n
    vertex_z = Fraction(0)
    direction_z = Fraction(0)
    rhs = 2 * n + 1
    for row, basic in enumerate(state.basis):
        den = int(state.row_den[row])
        value = Fraction(int(state.tableau[row, rhs]), den)
        rate = Fraction(-int(state.tableau[row, col]), den)
        assert rate >= 0
        if basic < n:
            vertex[basic] = value
            direction[basic] = rate
        elif basic == 2 * n:
            vertex_z = value
            direction_z = rate
    if col < n:
        direction[col] = Fraction(1)
    elif col == 2 * n:  # pragma: no cover - z never re-enters
        direction_z = Fraction(1)
    return SecondaryRay(
        vertex_y=tuple(vertex),
        vertex_z=vertex_z,
        direction_y=tuple(direction),
        direction_z=direction_z,
        iterations=state.iterations,
    )


def _assert_complementary_basis(state: PivotState) -> None:
    basic = set(state.basis)
    doubles = 0
    for i in range(state.n):
        in_y = i in basic
        in_v = (i + state.n) in basic
        if in_y and in_v:
            raise AssertionError(f"both y{i + 1} and v{i + 1} basic")
        if not in_y and not in_v:
            doubles += 1
    z_basic = 2 * state.n in basic
    if z_basic and doubles != 1:
        raise AssertionError(f"{doubles} double labels while z is basic")
    if not z_basic and doubles != 0:
        raise AssertionError("double label left after z departed")


def lemke_solve(
    instance: LcpInstance,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    trace: Callable[[str], None] | None = None,
    check_invariants: bool = False,
) -> LcpOutcome:
    """Follow the complementary path from the primary ray to its end.

    With ``check_invariants`` every pivot asserts basis complementarity and
    that no basis signature repeats (lexicographic anti-cycling at work).
    """
    if all(qi >= 0 for qi in instance.q):
        return Solution(y=tuple(Fraction(0) for _ in instance.q), iterations=0)
    state = augment(instance)
    if trace:
        trace(f"step {state.iterations}: enter z leave {state.label_name(state.double_label + state.n)} z={state.z_value()}")
    seen: set[tuple[int, ...]] = set()
    if check_invariants:
        _assert_complementary_basis(state)
        seen.add(tuple(sorted(state.basis)))
    while state.iterations < max_iterations:
        status = pivot_step(state, trace)
        if status == "solution":
            return Solution(y=state.solution_y(), iterations=state.iterations)
        if status == "ray":
            return _ray_outcome(state)
        if check_invariants:
            _assert_complementary_basis(state)
            signature = tuple(sorted(state.basis))
            if signature in seen:
                raise AssertionError("basis signature repeated: anti-cycling failed")
            seen.add(signature)
    return IterationLimit(state=state, iterations=state.iterations)


def verify_lcp_solution(
    instance: LcpInstance, y: Sequence[Fraction]
) -> tuple[int, str] | None:
    """Exact check of M y <= q, y >= 0 and complementarity; None means pass."""
    n = instance.n
    if len(y) != n:
        raise ValueError(f"dimension mismatch: expected {n}, got {len(y)}")
    for i, yi in enumerate(y):
        if yi < 0:
            return i, f"y[{i}] = {yi} < 0"
    for i in range(n):
        slack = instance.q[i] - sum(
            (instance.matrix[i][j] * y[j] for j in range(n)), Fraction(0)
        )
        if slack < 0:
            return i, f"row {i}: M y exceeds q by {-slack}"
        if y[i] * slack != 0:
            return i, f"row {i}: complementarity violated (y*slack = {y[i] * slack})"
    return None


# ---------------------------------------------------------------------------
# Brute-force oracle: enumerate all complementary supports


def _solve_support(
    rows: list[tuple[int, ...]],
    rhs: list[int],
    support: tuple[int, ...],
) -> list[Fraction] | None:
    """Unique solution of the support subsystem, or None if singular.

    Bareiss fraction-free elimination; a singular subsystem is either
    inconsistent or underdetermined, and in both cases contributes no vertex
    that some nonsingular support would not also produce.
    """
    s = len(support)
    if s == 0:
        return []
    a = [[rows[i][j] for j in support] + [rhs[i]] for i in support]
    prev = 1
    for k in range(s):
        pivot_row = None
        for i in range(k, s):
            if a[i][k] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            return None
        if pivot_row != k:
            a[k], a[pivot_row] = a[pivot_row], a[k]
        akk = a[k][k]
        for i in range(k + 1, s):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, s + 1):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    x: list[Fraction] = [Fraction(0)] * s
    for i in range(s - 1, -1, -1):
        acc = Fraction(a[i][s])
        for j in range(i + 1, s):
            acc -= a[i][j] * x[j]
        x[i] = acc / a[i][i]
    return x


def enumerate_complementary_solutions(
    matrix: Sequence[Sequence[Fraction]],
    q: Sequence[Fraction],
) -> tuple[list[tuple[Fraction, ...]], bool]:
    """Solve every one of the 2^n complementary supports exactly.

    Returns the nonnegative complementary solutions found (deduplicated) and a
    degeneracy flag, set when some solution has a zero coordinate inside its
    support or is produced by more than one support.
    """
    n = len(q)
    int_rows: list[tuple[int, ...]] = []
    int_rhs: list[int] = []
    for i in range(n):
        scale = 1
        for value in matrix[i]:
            scale = scale * value.denominator // gcd(scale, value.denominator)
        scale = scale * q[i].denominator // gcd(scale, q[i].denominator)
        int_rows.append(tuple(int(v.numerator) * (scale // v.denominator) for v in matrix[i]))
        int_rhs.append(int(q[i].numerator) * (scale // q[i].denominator))

    solutions: list[tuple[Fraction, ...]] = []
    seen: set[tuple[Fraction, ...]] = set()
    degenerate = False
    for mask in range(1 << n):
        support = tuple(i for i in range(n) if mask >> i & 1)
        x = _solve_support(int_rows, int_rhs, support)
        if x is None:
            continue
        if any(xi < 0 for xi in x):
            continue
        y = [Fraction(0)] * n
        for idx, value in zip(support, x):
            y[idx] = value
        # Complementarity is structural: y is zero off support, rows on support
        # were solved to equality.  Only feasibility off support needs a check.
        feasible = True
        for i in range(n):
            slack = q[i] - sum((matrix[i][j] * y[j] for j in support if y[j]), Fraction(0))
            if slack < 0:
                feasible = False
                break
        if not feasible:
            continue
        if any(xi == 0 for xi in x):
            degenerate = True
        key = tuple(y)
        if key in seen:
            degenerate = True
            continue
        seen.add(key)
        solutions.append(key)
    return solutions, degenerate
