"""Exact-arithmetic core: syntax trees and semantics of fuzzy programs.

Truth degrees are ``fractions.Fraction`` values in [0, 1]; all semantic
operations are exact.  A program is a list of rules ``head <- body`` where
the body is an expression tree over atoms, truth constants, negation and
the four binary connectives, and the head is a flat combination of atoms
and constants under a single connective.

Connective semantics (for degrees x, y):

* ``lukand``  (strong conjunction):  max(x + y - 1, 0)
* ``lukor``   (strong disjunction):  min(x + y, 1)
* ``godeland`` (min conjunction):    min(x, y)
* ``godelor``  (max disjunction):    max(x, y)
* negation:                          1 - x

A rule is satisfied by an interpretation I when I(head) >= I(body).
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class FaspError(Exception):
    """Base class for all errors raised by this package."""


class DegreeError(FaspError):
    """A truth degree is outside [0, 1] or not an exact rational."""


class InternalError(FaspError):
    """An internal invariant was breached; results cannot be trusted."""


class TpError(FaspError):
    """The immediate-consequence operator was applied outside its domain."""


class TpCapError(FaspError):
    """The consequence-operator iteration exceeded its step cap."""

    def __init__(self, cap: int, last: "Interpretation") -> None:
        super().__init__(f"no fixpoint within {cap} changing steps")
        self.cap = cap
        self.last = last


ZERO = Fraction(0)
ONE = Fraction(1)


def deg(value: Union[int, str, Fraction]) -> Fraction:
    """Coerce *value* to an exact truth degree in [0, 1].

    Accepts ints, Fractions and strings like ``"0.4"`` or ``"2/5"``.
    Floats are rejected: degrees must stay exact.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise DegreeError(f"inexact degree {value!r}; use int, str or Fraction")
    try:
        frac = Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise DegreeError(f"not a rational degree: {value!r}") from exc
    if not ZERO <= frac <= ONE:
        raise DegreeError(f"degree {frac} outside [0, 1]")
    return frac


class Conn(str, enum.Enum):
    """The four binary connectives."""

    LUK_AND = "lukand"
    LUK_OR = "lukor"
    GODEL_AND = "godeland"
    GODEL_OR = "godelor"

    @property
    def symbol(self) -> str:
        return _CONN_SYMBOL[self]

    def apply(self, x: Fraction, y: Fraction) -> Fraction:
        if self is Conn.LUK_AND:
            s = x + y - 1
            return s if s > ZERO else ZERO
        if self is Conn.LUK_OR:
            s = x + y
            return s if s < ONE else ONE
        if self is Conn.GODEL_AND:
            return x if x <= y else y
        return x if x >= y else y


_CONN_SYMBOL = {
    Conn.LUK_AND: "*",
    Conn.LUK_OR: "+",
    Conn.GODEL_AND: "&&",
    Conn.GODEL_OR: "||",
}

#: Head connective tag for single-item heads.
SINGLE = "single"


@dataclass(frozen=True)
class Atom:
    """A propositional atom, identified by name."""

    name: str

    def __repr__(self) -> str:
        return f"Atom({self.name!r})"


@dataclass(frozen=True)
class AtomRef:
    """An atom occurrence inside an expression."""

    atom: Atom


@dataclass(frozen=True)
class Const:
    """A truth constant in [0, 1]."""

    value: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", deg(self.value))


@dataclass(frozen=True)
class Neg:
    """Negation: evaluates to 1 - value of the argument."""

    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    """A binary connective application."""

    conn: Conn
    left: "Expr"
    right: "Expr"


Expr = Union[AtomRef, Const, Neg, Bin]

HeadItem = Union[Atom, Const]


@dataclass(frozen=True)
class HeadExpr:
    """A rule head: one or more atoms/constants under a single connective.

    ``conn`` is a :class:`Conn` value for multi-item heads and the string
    ``"single"`` for one-item heads.
    """

    conn: str
    items: tuple[HeadItem, ...]

    def __post_init__(self) -> None:
        if not self.items:
            raise ValueError("empty rule head")
        if (self.conn == SINGLE) != (len(self.items) == 1):
            raise ValueError(
                f"head connective {self.conn!r} inconsistent with "
                f"{len(self.items)} items"
            )
        if self.conn != SINGLE:
            Conn(self.conn)


def single_head(item: Union[HeadItem, str]) -> HeadExpr:
    """Build a one-item head from an atom, a constant, or an atom name."""
    if isinstance(item, str):
        item = Atom(item)
    return HeadExpr(SINGLE, (item,))


@dataclass(frozen=True)
class Rule:
    """A rule ``head <- body``; facts use body Const(1), constraints head Const(0)."""

    head: HeadExpr
    body: Expr


@dataclass(frozen=True)
class Program:
    """An ordered, immutable list of rules."""

    rules: tuple[Rule, ...]

    @classmethod
    def from_rules(cls, rules: Iterable[Rule]) -> "Program":
        return cls(tuple(rules))

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def atoms(self) -> tuple[Atom, ...]:
        """All atoms, in order of first occurrence (heads before bodies per rule)."""
        seen: dict[Atom, None] = {}
        for rule in self.rules:
            for item in rule.head.items:
                if isinstance(item, Atom):
                    seen.setdefault(item, None)
            for atom in expr_atoms(rule.body):
                seen.setdefault(atom, None)
        return tuple(seen)


def chain(conn: Conn, parts: Iterable[Expr]) -> Expr:
    """Fold *parts* into a left-associated chain under *conn* (one part: itself)."""
    parts = list(parts)
    if not parts:
        raise ValueError("empty chain")
    expr = parts[0]
    for part in parts[1:]:
        expr = Bin(conn, expr, part)
    return expr


def expr_atoms(expr: Expr) -> tuple[Atom, ...]:
    """Atoms occurring in *expr*, in first-occurrence (left-to-right) order."""
    seen: dict[Atom, None] = {}
    _collect_atoms(expr, seen, positive_only=False)
    return tuple(seen)


def positive_atoms(expr: Expr) -> tuple[Atom, ...]:
    """Atoms of *expr* not under any negation, in first-occurrence order."""
    seen: dict[Atom, None] = {}
    _collect_atoms(expr, seen, positive_only=True)
    return tuple(seen)


def _collect_atoms(expr: Expr, seen: dict[Atom, None], positive_only: bool) -> None:
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, AtomRef):
            seen.setdefault(node.atom, None)
        elif isinstance(node, Neg):
            if not positive_only:
                stack.append(node.arg)
        elif isinstance(node, Bin):
            # Push right first so the left subtree is visited first.
            stack.append(node.right)
            stack.append(node.left)
    # Iterative DFS keeps deep chains from hitting the recursion limit.


def contains_neg(expr: Expr) -> bool:
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Neg):
            return True
        if isinstance(node, Bin):
            stack.extend((node.left, node.right))
    return False


def contains_bin(expr: Expr) -> bool:
    """Whether *expr* contains any binary connective."""
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Bin):
            return True
        if isinstance(node, Neg):
            stack.append(node.arg)
    return False


class Interpretation(Mapping):
    """A mapping from atoms to truth degrees; unmentioned atoms are 0.

    Zero entries are dropped on construction, so two interpretations that
    agree on all atoms compare equal regardless of which zeros were spelled
    out.  Instances are immutable and hashable.
    """

    __slots__ = ("_values",)

    def __init__(self, values: Union[Mapping, Iterable[tuple]] = ()) -> None:
        items = values.items() if isinstance(values, Mapping) else values
        store: dict[Atom, Fraction] = {}
        for key, value in items:
            atom = Atom(key) if isinstance(key, str) else key
            degree = deg(value)
            if degree != ZERO:
                store[atom] = degree
        self._values = store

    def __getitem__(self, key: Union[Atom, str]) -> Fraction:
        if isinstance(key, str):
            key = Atom(key)
        return self._values.get(key, ZERO)

    def __iter__(self) -> Iterator[Atom]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __contains__(self, key: object) -> bool:
        if isinstance(key, str):
            key = Atom(key)
        return key in self._values

    def __hash__(self) -> int:
        return hash(frozenset(self._values.items()))

    def __repr__(self) -> str:
        inner = ", ".join(
            f"{atom.name}: {value}"
            for atom, value in sorted(self._values.items(), key=lambda kv: kv[0].name)
        )
        return f"Interpretation({{{inner}}})"

    def set(self, key: Union[Atom, str], value) -> "Interpretation":
        """A copy with one atom rebound."""
        if isinstance(key, str):
            key = Atom(key)
        updated = dict(self._values)
        updated[key] = deg(value)
        return Interpretation(updated)

    def restrict(self, atoms: Iterable[Atom]) -> "Interpretation":
        """A copy mentioning only *atoms*."""
        keep = set(atoms)
        return Interpretation(
            {atom: value for atom, value in self._values.items() if atom in keep}
        )

    def dominated_by(self, other: "Interpretation") -> bool:
        """Pointwise <= against *other* over all atoms mentioned in either."""
        return all(self[atom] <= other[atom] for atom in set(self) | set(other))


def eval_expr(expr: Expr, interp: Interpretation) -> Fraction:
    """The truth degree of *expr* under *interp* (always within [0, 1])."""
    if isinstance(expr, AtomRef):
        return interp[expr.atom]
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Neg):
        return ONE - eval_expr(expr.arg, interp)
    return expr.conn.apply(eval_expr(expr.left, interp), eval_expr(expr.right, interp))


def eval_head(head: HeadExpr, interp: Interpretation) -> Fraction:
    """The truth degree of a rule head under *interp*."""
    values = [
        interp[item] if isinstance(item, Atom) else item.value for item in head.items
    ]
    if head.conn == SINGLE:
        return values[0]
    conn = Conn(head.conn)
    acc = values[0]
    for value in values[1:]:
        acc = conn.apply(acc, value)
    return acc


def rule_satisfied(rule: Rule, interp: Interpretation) -> bool:
    """Whether head degree >= body degree under *interp*."""
    return eval_head(rule.head, interp) >= eval_expr(rule.body, interp)


def violated_rules(program: Program, interp: Interpretation) -> list[Rule]:
    """The rules of *program* not satisfied by *interp*, in program order."""
    return [rule for rule in program.rules if not rule_satisfied(rule, interp)]


def is_model(program: Program, interp: Interpretation) -> bool:
    """Whether *interp* satisfies every rule of *program*."""
    return all(rule_satisfied(rule, interp) for rule in program.rules)


def reduct(program: Program, interp: Interpretation) -> Program:
    """The reduct of *program* with respect to *interp*.

    Every maximal negated subexpression ``~alpha`` is replaced by the
    constant ``1 - I(alpha)``; the result is negation-free and evaluates,
    under any J, exactly as the original body does when its negated parts
    are read under I.
    """
    return Program(
        tuple(Rule(rule.head, _reduct_expr(rule.body, interp)) for rule in program.rules)
    )


def _reduct_expr(expr: Expr, interp: Interpretation) -> Expr:
    if isinstance(expr, Neg):
        return Const(ONE - eval_expr(expr.arg, interp))
    if isinstance(expr, Bin):
        return Bin(expr.conn, _reduct_expr(expr.left, interp), _reduct_expr(expr.right, interp))
    return expr


def tp_step(program: Program, interp: Interpretation) -> Interpretation:
    """One application of the immediate-consequence operator.

    Requires atomic (single-atom or single-constant) heads and
    negation-free bodies; constant-head rules are constraints and
    contribute nothing.  The result maps each atom p to the maximum body
    degree over the rules with head p (0 when there are none).
    """
    for rule in program.rules:
        if len(rule.head.items) > 1:
            raise TpError(f"non-atomic head in consequence operator: {rule.head}")
        if contains_neg(rule.body):
            raise TpError("negation in consequence-operator body; take a reduct first")
    acc: dict[Atom, Fraction] = {}
    for rule in program.rules:
        item = rule.head.items[0]
        if isinstance(item, Const):
            continue
        value = eval_expr(rule.body, interp)
        if value > acc.get(item, ZERO):
            acc[item] = value
    return Interpretation(acc)


def tp_fixpoint(
    program: Program, cap: Union[int, None] = None
) -> tuple[Interpretation, int]:
    """Iterate the consequence operator from the all-zero interpretation.

    Returns (least fixpoint, number of value-changing applications).
    Raises :class:`TpCapError` if more than *cap* changing applications
    are needed (default cap: 2 * |atoms| + 1).
    """
    if cap is None:
        cap = 2 * len(program.atoms()) + 1
    current = Interpretation()
    steps = 0
    while True:
        nxt = tp_step(program, current)
        if nxt == current:
            return current, steps
        steps += 1
        if steps > cap:
            raise TpCapError(cap, nxt)
        current = nxt
