"""Translation of fuzzy programs into SMT theories over linear real arithmetic.

Four theory builders share one structural term translation of expressions:

* :func:`smt_theory` — sound for every program: rule constraints plus one
  universally quantified minimality formula.
* :func:`comp` — completion for atomic-head programs: per-atom support
  equations; sound on acyclic programs.
* :func:`rcomp` — completion of the crisp-extracted program plus an
  integrality link ``b_p = ite(p > 0, 1, 0)`` per crispified atom; sound
  when the program minus its crispifying rules is acyclic.  The value of
  a crispified atom is read back from its surrogate.
* :func:`ocomp` — completion plus rank constants ordering the derivation,
  sound for head-cycle-free programs without recursive ``+`` in bodies.

:func:`select_pipeline` picks a strategy from the program's structure
(refined completion, then ordered completion, then the quantified theory)
and applies the required rewrites in order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .analysis import ProgramClass, classify, crisp_rules
from .core import (
    Atom,
    AtomRef,
    Bin,
    Conn,
    Const,
    Expr,
    FaspError,
    HeadExpr,
    Program,
    Rule,
    chain,
    positive_atoms,
)
from .rewrite import RewriteError, bool_minus, shift, simp


class TranslateError(FaspError):
    """A theory builder was applied outside its domain."""


class StrategyError(FaspError):
    """A forced strategy violates its soundness preconditions."""


# ------------------------------------------------------------ term language


@dataclass(frozen=True)
class NumConst:
    value: Fraction

    def __post_init__(self) -> None:
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class SymConst:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Add:
    left: "SmtTerm"
    right: "SmtTerm"


@dataclass(frozen=True)
class Sub:
    left: "SmtTerm"
    right: "SmtTerm"


@dataclass(frozen=True)
class Ite:
    cond: "SmtFormula"
    then: "SmtTerm"
    other: "SmtTerm"


SmtTerm = Union[NumConst, SymConst, Var, Add, Sub, Ite]


@dataclass(frozen=True)
class Cmp:
    op: str  # one of < <= >= > = !=
    left: SmtTerm
    right: SmtTerm

    def __post_init__(self) -> None:
        if self.op not in ("<", "<=", ">=", ">", "=", "!="):
            raise ValueError(f"unknown comparison operator {self.op!r}")
        for side in ("left", "right"):
            value = getattr(self, side)
            if isinstance(value, (int, Fraction)):
                object.__setattr__(self, side, NumConst(Fraction(value)))


@dataclass(frozen=True)
class And:
    parts: tuple["SmtFormula", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["SmtFormula", ...]


@dataclass(frozen=True)
class Implies:
    antecedent: "SmtFormula"
    consequent: "SmtFormula"


@dataclass(frozen=True)
class Iff:
    left: "SmtFormula"
    right: "SmtFormula"


@dataclass(frozen=True)
class Forall:
    variables: tuple[str, ...]
    body: "SmtFormula"


SmtFormula = Union[Cmp, And, Or, Implies, Iff, Forall]

#: The empty conjunction/disjunction, emitted as true/false.
TRUE = And(())
FALSE = Or(())


@dataclass(frozen=True)
class Theory:
    """Declared real constants plus closed formulas, tagged by strategy."""

    constants: tuple[str, ...]
    formulas: tuple[SmtFormula, ...]
    strategy: str


def inn_var_name(atom: Atom) -> str:
    return f"__x_{atom.name}"


def rank_const_name(atom: Atom) -> str:
    return f"__r_{atom.name}"


# -------------------------------------------------------- term translation


def term_of(expr: Expr, mode: str = "out") -> SmtTerm:
    """Structural translation of an expression to a term.

    ``out`` maps atoms to their declared constants; ``inn`` maps them to
    the quantified variables — except under negation, which always reads
    the outer constants: ``~alpha`` becomes ``1 - out(alpha)``.
    """
    if isinstance(expr, AtomRef):
        if mode == "inn":
            return Var(inn_var_name(expr.atom))
        return SymConst(expr.atom.name)
    if isinstance(expr, Const):
        return NumConst(expr.value)
    if isinstance(expr, Bin):
        left = term_of(expr.left, mode)
        right = term_of(expr.right, mode)
        if expr.conn is Conn.LUK_OR:
            total = Add(left, right)
            return Ite(Cmp("<=", total, NumConst(Fraction(1))), total, NumConst(Fraction(1)))
        if expr.conn is Conn.LUK_AND:
            total = Sub(Add(left, right), NumConst(Fraction(1)))
            return Ite(Cmp(">=", total, NumConst(Fraction(0))), total, NumConst(Fraction(0)))
        if expr.conn is Conn.GODEL_OR:
            return Ite(Cmp(">=", left, right), left, right)
        return Ite(Cmp("<=", left, right), left, right)
    # Negation: always evaluated against the outer constants.
    return Sub(NumConst(Fraction(1)), term_of(expr.arg, "out"))


def head_expr(head: HeadExpr) -> Expr:
    """A rule head viewed as an expression (items chained by the connective)."""
    parts: list[Expr] = [
        AtomRef(item) if isinstance(item, Atom) else item for item in head.items
    ]
    if len(parts) == 1:
        return parts[0]
    return chain(Conn(head.conn), parts)


def rule_formula(rule: Rule, mode: str = "out") -> SmtFormula:
    """f(head) >= f(body) under the given mode."""
    return Cmp(">=", term_of(head_expr(rule.head), mode), term_of(rule.body, mode))


def _in_unit_interval(term: SmtTerm) -> list[SmtFormula]:
    return [
        Cmp(">=", term, NumConst(Fraction(0))),
        Cmp("<=", term, NumConst(Fraction(1))),
    ]


# ------------------------------------------------------- quantified theory


def smt_theory(program: Program) -> Theory:
    """The quantified translation: rule constraints plus a minimality formula.

    Sound and complete for arbitrary programs: structures over the atom
    constants correspond one-to-one to stable models.
    """
    atoms = program.atoms()
    formulas: list[SmtFormula] = []
    for atom in atoms:
        formulas.append(And(tuple(_in_unit_interval(SymConst(atom.name)))))
    for rule in program.rules:
        formulas.append(rule_formula(rule, "out"))

    if atoms:
        bounds: list[SmtFormula] = []
        for atom in atoms:
            var = Var(inn_var_name(atom))
            bounds.append(
                And(
                    (
                        Cmp(">=", var, NumConst(Fraction(0))),
                        Cmp("<=", var, SymConst(atom.name)),
                    )
                )
            )
        inns = [rule_formula(rule, "inn") for rule in program.rules]
        equalities = [
            Cmp("=", Var(inn_var_name(atom)), SymConst(atom.name)) for atom in atoms
        ]
        formulas.append(
            Forall(
                tuple(inn_var_name(atom) for atom in atoms),
                Implies(And(tuple(bounds) + tuple(inns)), And(tuple(equalities))),
            )
        )
    else:
        # No atoms to minimize: the minimality formula is vacuous.
        formulas.append(TRUE)

    return Theory(tuple(atom.name for atom in atoms), tuple(formulas), "smt")


# ------------------------------------------------------------- completions


def _atomic_head_atom(rule: Rule) -> Optional[Atom]:
    if len(rule.head.items) != 1:
        raise TranslateError(
            "completion requires atomic heads; run the head shift first"
        )
    item = rule.head.items[0]
    return item if isinstance(item, Atom) else None


def supp_term(rules: list[Rule]) -> SmtTerm:
    """The support of an atom: an ite-chain computing max over rule bodies.

    Empty support is the constant 0; a one-rule chain is the bare body
    term, without an ite wrapper.
    """
    if not rules:
        return NumConst(Fraction(0))
    first = term_of(rules[0].body, "out")
    if len(rules) == 1:
        return first
    rest = supp_term(rules[1:])
    return Ite(Cmp(">=", first, rest), first, rest)


def comp(program: Program, universe: tuple[Atom, ...] = ()) -> Theory:
    """Completion: per-atom support equations plus constraint formulas.

    *universe* may add atoms beyond At(program); they receive the empty
    support (pinning them to 0), which keeps completions comparable when
    rules have been removed by other transformations.
    """
    heads: dict[Atom, list[Rule]] = {}
    constraints: list[Rule] = []
    for rule in program.rules:
        atom = _atomic_head_atom(rule)
        if atom is None:
            constraints.append(rule)
        else:
            heads.setdefault(atom, []).append(rule)

    atoms = list(program.atoms())
    known = set(atoms)
    for atom in universe:
        if atom not in known:
            atoms.append(atom)
            known.add(atom)

    formulas: list[SmtFormula] = []
    for atom in atoms:
        sym = SymConst(atom.name)
        formulas.append(
            And(
                tuple(_in_unit_interval(sym))
                + (Cmp("=", sym, supp_term(heads.get(atom, []))),)
            )
        )
    for rule in constraints:
        formulas.append(rule_formula(rule, "out"))
    return Theory(tuple(atom.name for atom in atoms), tuple(formulas), "comp")


def rcomp(program: Program) -> Theory:
    """Refined completion: crisp extraction plus per-surrogate integrality.

    The completion is taken over the crisp-extracted program, padded with
    the original atom universe (an atom whose only rules were crispifiers
    keeps a pinned-to-0 constant; its reported value is its surrogate's).
    """
    extracted = bool_minus(program)
    base = comp(extracted.program, universe=program.atoms())
    links: list[SmtFormula] = []
    for original, surrogate in extracted.bool_atoms.items():
        links.append(
            Cmp(
                "=",
                SymConst(surrogate.name),
                Ite(
                    Cmp(">", SymConst(original.name), NumConst(Fraction(0))),
                    NumConst(Fraction(1)),
                    NumConst(Fraction(0)),
                ),
            )
        )
    return Theory(base.constants, base.formulas + tuple(links), "rcomp")


def rank_term(atoms: tuple[Atom, ...]) -> SmtTerm:
    """Max over rank constants as an ite-chain; the empty rank is 0."""
    if not atoms:
        return NumConst(Fraction(0))
    first = SymConst(rank_const_name(atoms[0]))
    if len(atoms) == 1:
        return first
    rest = rank_term(atoms[1:])
    return Ite(Cmp(">=", first, rest), first, rest)


def ocomp(program: Program) -> Theory:
    """Ordered completion: completion plus derivation-rank constraints.

    Per atom p: the rank constant ranges over [1..|At|] (as a finite
    disjunction), and p > 0 requires some rule to support p exactly with
    rank 1 + max rank of its positive body atoms.
    """
    base = comp(program)
    atoms = program.atoms()
    size = len(atoms)

    heads: dict[Atom, list[Rule]] = {}
    for rule in program.rules:
        atom = _atomic_head_atom(rule)
        if atom is not None:
            heads.setdefault(atom, []).append(rule)

    formulas = list(base.formulas)
    for atom in atoms:
        rank_sym = SymConst(rank_const_name(atom))
        domain = Or(
            tuple(
                Cmp("=", rank_sym, NumConst(Fraction(step)))
                for step in range(1, size + 1)
            )
        )
        disjuncts = []
        for rule in heads.get(atom, []):
            disjuncts.append(
                And(
                    (
                        Cmp("=", SymConst(atom.name), term_of(rule.body, "out")),
                        Cmp(
                            "=",
                            rank_sym,
                            Add(
                                NumConst(Fraction(1)),
                                rank_term(positive_atoms(rule.body)),
                            ),
                        ),
                    )
                )
            )
        if not disjuncts:
            osupp: SmtFormula = FALSE
        elif len(disjuncts) == 1:
            osupp = disjuncts[0]
        else:
            osupp = Or(tuple(disjuncts))
        formulas.append(
            And(
                (
                    domain,
                    Implies(
                        Cmp(">", SymConst(atom.name), NumConst(Fraction(0))), osupp
                    ),
                )
            )
        )

    constants = base.constants + tuple(rank_const_name(atom) for atom in atoms)
    return Theory(constants, tuple(formulas), "ocomp")


# ----------------------------------------------------------- pipeline glue

OCOMP_HEAD_CONNS = {Conn.GODEL_AND.value, Conn.LUK_OR.value, "single"}


def rcomp_eligible(cls: ProgramClass) -> Optional[str]:
    """None when eligible, else the violated condition."""
    if not cls.acyclic_mod_bool:
        return "program is cyclic even after removing crispifying rules"
    if not cls.hcf:
        return "program is not head-cycle-free"
    return None


def ocomp_eligible(cls: ProgramClass) -> Optional[str]:
    if not cls.hcf:
        return "program is not head-cycle-free"
    if not cls.nonrec_lukor:
        return "program has recursion through a + body"
    extra = set(cls.head_conns) - OCOMP_HEAD_CONNS
    if extra:
        return f"head connectives {sorted(extra)} not supported by ordered completion"
    return None


@dataclass(frozen=True)
class Pipeline:
    """A compiled program: theory plus the bookkeeping to read models back."""

    theory: Theory
    strategy: str
    program_class: ProgramClass
    rewritten: Program
    original_atoms: tuple[Atom, ...]
    fresh_atoms: tuple[Atom, ...] = ()
    bool_atoms: dict[Atom, Atom] = field(default_factory=dict)


def select_pipeline(
    program: Program, strategy: str = "auto", cls: Optional[ProgramClass] = None
) -> Pipeline:
    """Choose and build a translation.

    ``auto`` prefers the refined completion (acyclic modulo crispifiers,
    head-cycle-free), then the ordered completion (head-cycle-free,
    non-recursive ``+`` bodies, only ``&&``/``+``/single heads), then the
    quantified theory.  Forcing an ineligible strategy raises
    :class:`StrategyError` naming the violated condition.
    """
    if cls is None:
        cls = classify(program)

    if strategy == "auto":
        if rcomp_eligible(cls) is None:
            strategy = "rcomp"
        elif ocomp_eligible(cls) is None:
            strategy = "ocomp"
        else:
            strategy = "smt"
        if strategy != "smt":
            # The class flags cannot see every shift precondition (e.g. a
            # degree inside a || head); fall back to the always-sound theory.
            try:
                return _build(program, strategy, cls)
            except RewriteError:
                strategy = "smt"
        return _build(program, strategy, cls)
    if strategy == "smt":
        pass
    elif strategy in ("rcomp", "comp"):
        reason = rcomp_eligible(cls)
        if reason is not None:
            raise StrategyError(f"{strategy} refused: {reason}")
    elif strategy == "ocomp":
        reason = ocomp_eligible(cls)
        if reason is not None:
            raise StrategyError(f"ocomp refused: {reason}")
    else:
        raise StrategyError(f"unknown strategy {strategy!r}")
    return _build(program, strategy, cls)


def _build(program: Program, strategy: str, cls: ProgramClass) -> Pipeline:
    original_atoms = program.atoms()

    if strategy == "smt":
        simped = simp(program)
        return Pipeline(
            theory=smt_theory(simped.program),
            strategy="smt",
            program_class=cls,
            rewritten=simped.program,
            original_atoms=original_atoms,
            fresh_atoms=simped.fresh_atoms,
        )

    simped = simp(program)
    shifted = shift(simped.program)
    fresh = simped.fresh_atoms + shifted.fresh_atoms
    rewritten = shifted.program

    if strategy == "comp":
        leftover = crisp_rules(rewritten)
        if leftover:
            raise StrategyError(
                "comp refused: crispifying rules remain after shifting; use rcomp"
            )
        theory = comp(rewritten)
        return Pipeline(
            theory=theory,
            strategy="comp",
            program_class=cls,
            rewritten=rewritten,
            original_atoms=original_atoms,
            fresh_atoms=fresh,
        )

    if strategy == "rcomp":
        extracted = bool_minus(rewritten)
        theory = rcomp(rewritten)
        return Pipeline(
            theory=theory,
            strategy="rcomp",
            program_class=cls,
            rewritten=rewritten,
            original_atoms=original_atoms,
            fresh_atoms=fresh + extracted.fresh_atoms,
            bool_atoms=extracted.bool_atoms,
        )

    theory = ocomp(rewritten)
    return Pipeline(
        theory=theory,
        strategy="ocomp",
        program_class=cls,
        rewritten=rewritten,
        original_atoms=original_atoms,
        fresh_atoms=fresh,
    )
