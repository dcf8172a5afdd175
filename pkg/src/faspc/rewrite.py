"""Program rewriting: body/head normalization, head shifting, crisp extraction.

Three stable-model-preserving transformations (the last one preserving
models only together with the integrality constraint its consumers add):

* :func:`simp` — normalizes every body to a literal or a one-connective
  chain over literals, splits min-conjunction heads, eliminates ``||``
  from bodies, and extracts complex subexpressions into fresh ``__f``
  atoms.
* :func:`shift` — eliminates multi-atom ``+``/``*``/``||`` heads on
  head-cycle-free programs, one construction per connective, using fresh
  ``__q`` atoms.
* :func:`bool_minus` — removes crispifying rules and reroutes body
  occurrences of their atoms through fresh ``__b`` surrogates guarded by
  choice rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .analysis import (
    component_index,
    crisp_rules,
    dependency_graph,
    hcf_violation,
)
from .core import (
    SINGLE,
    Atom,
    AtomRef,
    Bin,
    Conn,
    Const,
    Expr,
    FaspError,
    HeadExpr,
    Neg,
    Program,
    Rule,
    chain,
    contains_bin,
    single_head,
)


class RewriteError(FaspError):
    """A rewrite was applied outside its domain."""


class HeadCycleError(RewriteError):
    """Shifting refused: a disjunctive head holds two same-component atoms."""

    def __init__(self, rule: Rule) -> None:
        from .frontend import rule_text

        super().__init__(f"program is not head-cycle-free: {rule_text(rule)}")
        self.rule = rule


@dataclass(frozen=True)
class RewriteResult:
    """A rewritten program plus bookkeeping about introduced atoms."""

    program: Program
    fresh_atoms: tuple[Atom, ...] = ()
    bool_atoms: dict[Atom, Atom] = field(default_factory=dict)


class FreshNames:
    """Generates reserved-prefix atom names that avoid a given name pool."""

    def __init__(self, taken: Iterable[str]) -> None:
        self._taken = set(taken)
        self._counters: dict[str, int] = {}

    def fresh(self, prefix: str) -> Atom:
        counter = self._counters.get(prefix, 0)
        while True:
            counter += 1
            name = f"{prefix}{counter}"
            if name not in self._taken:
                break
        self._counters[prefix] = counter
        self._taken.add(name)
        return Atom(name)


def _is_literal(expr: Expr) -> bool:
    """Atom, constant, or a pure negation chain over one of those."""
    return not contains_bin(expr)


def is_normal_body(expr: Expr) -> bool:
    """The simp body normal form: a literal, or one-connective chain of literals.

    ``||`` chains do not count: simp eliminates them from bodies entirely.
    """
    if _is_literal(expr):
        return True
    if not isinstance(expr, Bin) or expr.conn is Conn.GODEL_OR:
        return False
    leaves: list[Expr] = []
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Bin):
            if node.conn is not expr.conn:
                return False
            stack.extend((node.right, node.left))
        else:
            leaves.append(node)
    return all(_is_literal(leaf) for leaf in leaves)


def is_normal_program(program: Program) -> bool:
    return all(
        is_normal_body(rule.body)
        and not (rule.head.conn == Conn.GODEL_AND.value and len(rule.head.items) > 1)
        for rule in program.rules
    )


def _flatten(expr: Expr, conn: Conn) -> list[Expr]:
    """All maximal non-*conn* subtrees of a same-connective tree, in order."""
    parts: list[Expr] = []
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Bin) and node.conn is conn:
            stack.append(node.right)
            stack.append(node.left)
        else:
            parts.append(node)
    return parts


def simp(program: Program) -> RewriteResult:
    """Normalize bodies and heads; see the module docstring.

    Idempotent: normal rules pass through unchanged (up to reassociation
    of same-connective chains, which the parser already left-associates).
    """
    namer = FreshNames(atom.name for atom in program.atoms())
    out: list[Rule] = []
    fresh: list[Atom] = []

    def define(expr: Expr) -> Atom:
        atom = namer.fresh("__f")
        fresh.append(atom)
        emit(single_head(atom), expr)
        return atom

    def normal_alternatives(body: Expr) -> list[Expr]:
        # Top-level || splits the rule into one alternative per branch.
        if isinstance(body, Bin) and body.conn is Conn.GODEL_OR:
            return normal_alternatives(body.left) + normal_alternatives(body.right)
        if _is_literal(body):
            return [body]
        if isinstance(body, Neg):
            # ~beta with complex beta: extract beta, keep the negation.
            return [Neg(AtomRef(define(body.arg)))]
        assert isinstance(body, Bin)
        parts = []
        for operand in _flatten(body, body.conn):
            if _is_literal(operand):
                parts.append(operand)
            elif isinstance(operand, Neg):
                parts.append(Neg(AtomRef(define(operand.arg))))
            else:
                parts.append(AtomRef(define(operand)))
        return [chain(body.conn, parts)]

    def emit(head: HeadExpr, body: Expr) -> None:
        if head.conn == Conn.GODEL_AND.value:
            heads = [HeadExpr(SINGLE, (item,)) for item in head.items]
        else:
            heads = [head]
        for alternative in normal_alternatives(body):
            for single in heads:
                out.append(Rule(single, alternative))

    for rule in program.rules:
        emit(rule.head, rule.body)
    return RewriteResult(Program(tuple(out)), tuple(fresh))


def _neg_item(item) -> Expr:
    if isinstance(item, Atom):
        return Neg(AtomRef(item))
    return Neg(Const(item.value))


def _fold_const_head(conn: Conn, items) -> Const:
    acc = items[0].value
    for item in items[1:]:
        acc = conn.apply(acc, item.value)
    return Const(acc)


def shift(program: Program) -> RewriteResult:
    """Eliminate multi-atom disjunctive heads on a head-cycle-free program.

    Per multi-atom head rule with head items e_1 .. e_n (atoms p_i and
    constants) and body beta (extracted into a fresh atom first when it
    contains a binary connective):

    * ``+`` head: one rule per atom, ``p_i <- beta * ~e_1 * ... (omit i)``;
    * ``*`` head: constants fold into a single c; fresh q;
      ``p_i <- q * (beta + ~p_1 + ... omit i ... + ~c)`` plus ``q <- beta``,
      ``q <- q + q`` and, when c < 1, the bound ``0 <- beta * ~c`` (no
      choice of atom values lifts the head above c, but the capped per-atom
      bodies alone would accept a larger body);
    * ``||`` head (atoms only, at most one of which occurs in another
      head): heads ordered with that separately headed atom last; fresh
      q_1..q_n; ``p_i <- beta && ~q_1 && ... && ~q_{i-1} && q_i`` plus,
      for i < n, ``q_i <- ~~((p_i || ... || p_n) * ~(p_{i+1} || ... || p_n))``
      and ``q_i <- q_i + q_i``, and finally ``q_n <- 1``.  The double
      negation fixes the guards under the reduct so a maximum at any
      position survives minimization; an atom whose value another rule may
      force sits last so a tie with it never licenses an earlier atom, and
      two such atoms admit no sound order at all, so they are refused.
    """
    violation = hcf_violation(program)
    if violation is not None:
        raise HeadCycleError(violation)
    for rule in program.rules:
        if rule.head.conn == Conn.GODEL_AND.value:
            raise RewriteError(
                "multi-atom min-conjunction head; normalize with simp first"
            )

    namer = FreshNames(atom.name for atom in program.atoms())
    order = component_index(dependency_graph(program))
    head_count: dict[Atom, int] = {}
    for rule in program.rules:
        for item in rule.head.items:
            if isinstance(item, Atom):
                head_count[item] = head_count.get(item, 0) + 1
    out: list[Rule] = []
    fresh: list[Atom] = []

    def extracted_body(body: Expr) -> Expr:
        if not contains_bin(body):
            return body
        atom = namer.fresh("__f")
        fresh.append(atom)
        out.append(Rule(single_head(atom), body))
        return AtomRef(atom)

    for rule in program.rules:
        if len(rule.head.items) == 1:
            out.append(rule)
            continue
        conn = Conn(rule.head.conn)
        items = rule.head.items
        atom_positions = [i for i, item in enumerate(items) if isinstance(item, Atom)]
        if not atom_positions:
            out.append(Rule(single_head(_fold_const_head(conn, items)), rule.body))
            continue

        if conn is Conn.LUK_OR:
            beta = extracted_body(rule.body)
            for i in atom_positions:
                tail = [_neg_item(items[j]) for j in range(len(items)) if j != i]
                out.append(Rule(single_head(items[i]), chain(Conn.LUK_AND, [beta] + tail)))
        elif conn is Conn.LUK_AND:
            beta = extracted_body(rule.body)
            consts = [item for item in items if not isinstance(item, Atom)]
            extra: list[Expr] = []
            if consts:
                folded = _fold_const_head(Conn.LUK_AND, consts)
                if folded.value < 1:
                    extra = [_neg_item(folded)]
                    # No choice of atom values lifts the head above the
                    # folded constant, but the per-atom bodies below cap at
                    # 1 and would accept a larger body; bound it explicitly.
                    out.append(
                        Rule(
                            single_head(Const(Fraction(0))),
                            Bin(Conn.LUK_AND, beta, _neg_item(folded)),
                        )
                    )
            crisp = namer.fresh("__q")
            fresh.append(crisp)
            for i in atom_positions:
                tail = [_neg_item(items[j]) for j in atom_positions if j != i]
                inner = chain(Conn.LUK_OR, [beta] + tail + extra)
                out.append(
                    Rule(single_head(items[i]), Bin(Conn.LUK_AND, AtomRef(crisp), inner))
                )
            out.append(Rule(single_head(crisp), beta))
            out.append(
                Rule(
                    single_head(crisp),
                    Bin(Conn.LUK_OR, AtomRef(crisp), AtomRef(crisp)),
                )
            )
        else:  # GODEL_OR
            if len(atom_positions) != len(items):
                raise RewriteError(
                    "constant in a max-disjunction head is not supported by shifting"
                )
            if sum(head_count[item] > 1 for item in items) > 1:
                # Two separately headed atoms can tie the maximum at a value
                # neither carries alone; whichever sits last is then force
                # lifted to the body value with no order that avoids it.
                raise RewriteError(
                    "two max-disjunction head atoms occur in other heads;"
                    " shifting has no sound order for them"
                )
            beta = extracted_body(rule.body)
            # The atom with another head occurrence goes last: its forced
            # value may tie the maximum, and a tie must never license an
            # atom placed after it.
            ordered = sorted(
                range(len(items)),
                key=lambda pos: (head_count[items[pos]] > 1, order[items[pos]], pos),
            )
            atoms = [items[pos] for pos in ordered]
            guards = [namer.fresh("__q") for _ in atoms]
            fresh.extend(guards)
            for i, atom in enumerate(atoms):
                parts: list[Expr] = [beta]
                parts.extend(Neg(AtomRef(guard)) for guard in guards[:i])
                parts.append(AtomRef(guards[i]))
                out.append(Rule(single_head(atom), chain(Conn.GODEL_AND, parts)))
            for i, guard in enumerate(guards[:-1]):
                whole = chain(Conn.GODEL_OR, [AtomRef(a) for a in atoms[i:]])
                rest = chain(Conn.GODEL_OR, [AtomRef(a) for a in atoms[i + 1 :]])
                # The double negation fixes the guard under the reduct;
                # written positively it would form a positive loop with the
                # atom it licenses, and minimization would drop both.
                out.append(
                    Rule(
                        single_head(guard),
                        Neg(Neg(Bin(Conn.LUK_AND, whole, Neg(rest)))),
                    )
                )
                out.append(
                    Rule(
                        single_head(guard),
                        Bin(Conn.LUK_OR, AtomRef(guard), AtomRef(guard)),
                    )
                )
            out.append(Rule(single_head(guards[-1]), Const(Fraction(1))))

    return RewriteResult(Program(tuple(out)), tuple(fresh))


def bool_minus(program: Program) -> RewriteResult:
    """Remove crispifying rules, rerouting their atoms through surrogates.

    Every body occurrence (negated or not) of an atom p constrained by a
    crispifying rule is replaced by a fresh surrogate b_p, and a choice
    rule ``b_p <- ~~b_p`` is appended.  The mapping p -> b_p is recorded;
    consumers must constrain b_p to {0, I(p)>0 ? 1 : 0} themselves — on
    its own this transformation does not preserve stable models.
    """
    removed = set(crisp_rules(program))
    if not removed:
        return RewriteResult(program, (), {})

    namer = FreshNames(atom.name for atom in program.atoms())
    surrogates: dict[Atom, Atom] = {}
    for rule in program.rules:
        if rule in removed:
            for item in rule.head.items:
                if isinstance(item, Atom) and item not in surrogates:
                    surrogates[item] = namer.fresh("__b")

    def replace(expr: Expr) -> Expr:
        if isinstance(expr, AtomRef):
            surrogate = surrogates.get(expr.atom)
            return AtomRef(surrogate) if surrogate is not None else expr
        if isinstance(expr, Neg):
            return Neg(replace(expr.arg))
        if isinstance(expr, Bin):
            return Bin(expr.conn, replace(expr.left), replace(expr.right))
        return expr

    out = [
        Rule(rule.head, replace(rule.body))
        for rule in program.rules
        if rule not in removed
    ]
    for original in surrogates:
        surrogate = surrogates[original]
        out.append(
            Rule(single_head(surrogate), Neg(Neg(AtomRef(surrogate))))
        )
    return RewriteResult(Program(tuple(out)), tuple(surrogates.values()), dict(surrogates))
