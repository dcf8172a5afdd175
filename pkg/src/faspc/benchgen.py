"""Benchmark and reduction instance generators.

All generators return program text that re-parses to a fixed AST for a
fixed seed.  Families:

* ``gen_coloring`` — fuzzy graph coloring: each vertex distributes truth
  degree 1 between its black and white shade, and each edge of degree d
  forbids d * black_x * black_y and d * white_x * white_y from exceeding
  0, i.e. adjacent vertices need sufficiently different shades.
* ``gen_hampath`` — fuzzy Hamiltonian path on a complete digraph.  The
  degree of each edge is split between choosing it (in) and discarding
  it (out); reaching a vertex multiplies the chosen edges' degrees along
  the walk from the start vertex; each other vertex must be reached to
  at least its own degree.  The propagation/constraint rules beyond the
  in/out split are a reconstruction: only the split rule has a canonical
  published form, so the exact rule set here is normative for this
  repository and pinned by its tests.
* ``gen_simple`` — two sanity families: ``stratified``, a negation-free
  chain p1 <- c, p(i+1) <- p(i) * d that the consequence operator walks
  in exactly n steps; and ``oddcycle``, the odd negative cycle whose
  unique stable model assigns 1/2 everywhere.
* ``qbf_to_fasp`` — the three reductions from 2-QBF formulas
  (exists x1..xm forall x(m+1)..xn, disjunction of 3-literal
  conjunctions) to FASP coherence, one per hard head connective.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .core import FaspError

__all__ = [
    "BenchError",
    "Qbf2Formula",
    "random_qbf2",
    "qbf_satisfiable",
    "qbf_to_fasp",
    "QBF_VARIANTS",
    "gen_coloring",
    "gen_hampath",
    "gen_simple",
]


class BenchError(FaspError):
    """A generator was called with invalid parameters."""


def _frac(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _degree(rng: random.Random, den: int) -> Fraction:
    """A random nonzero multiple of 1/den."""
    return Fraction(rng.randint(1, den), den)


# -------------------------------------------------------------- 2-QBF reduction


@dataclass(frozen=True)
class Qbf2Formula:
    """exists x1..xm forall x(m+1)..xn of a disjunction of 3-literal
    conjunctions; literals are signed variable indices."""

    m: int
    n: int
    disjuncts: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        if not (self.n > self.m >= 1):
            raise BenchError(f"need n > m >= 1, got m={self.m}, n={self.n}")
        if not self.disjuncts:
            raise BenchError("need at least one disjunct")
        for triple in self.disjuncts:
            if len(triple) != 3:
                raise BenchError(f"disjuncts are literal triples, got {triple}")
            for literal in triple:
                if literal == 0 or abs(literal) > self.n:
                    raise BenchError(f"literal {literal} out of range [1..{self.n}]")


def random_qbf2(m: int, n: int, k: int, seed: int) -> Qbf2Formula:
    """A uniformly random formula with k disjuncts."""
    if k < 1:
        raise BenchError("need at least one disjunct")
    rng = random.Random(seed)
    disjuncts = tuple(
        tuple(rng.choice((1, -1)) * rng.randint(1, n) for _ in range(3))
        for _ in range(k)
    )
    return Qbf2Formula(m, n, disjuncts)


def qbf_satisfiable(formula: Qbf2Formula) -> bool:
    """Brute-force truth: some existential assignment making the matrix
    true under every universal assignment."""

    def matrix(assignment: dict[int, bool]) -> bool:
        return any(
            all(assignment[abs(lit)] == (lit > 0) for lit in triple)
            for triple in formula.disjuncts
        )

    outer = range(1, formula.m + 1)
    inner = range(formula.m + 1, formula.n + 1)
    for outer_bits in product((False, True), repeat=len(outer)):
        assignment = dict(zip(outer, outer_bits))
        if all(
            matrix({**assignment, **dict(zip(inner, inner_bits))})
            for inner_bits in product((False, True), repeat=len(inner))
        ):
            return True
    return False


QBF_VARIANTS = ("godel_or", "luk_or", "luk_and")


def _sigma(literal: int) -> str:
    name = "xt" if literal > 0 else "xf"
    return f"{name}({abs(literal)})"


def qbf_to_fasp(formula: Qbf2Formula, variant: str) -> str:
    """The FASP program whose coherence equals the formula's truth.

    ``godel_or`` guesses each variable with xt || xf <- 1; ``luk_or``
    guesses with + and crispifies every atom through p <- p + p;
    ``luk_and`` forces xt + xf >= 3/2 via the * head and pins each atom
    to {1/2, 1} with the tripling rules, reading conjunctions with *.
    In all three, universal variables are driven to true by sat, and a
    constraint demands sat = 1.
    """
    if variant not in QBF_VARIANTS:
        raise BenchError(f"unknown variant {variant!r}; pick one of {QBF_VARIANTS}")
    lines = []
    conj = "&&" if variant != "luk_and" else "*"
    for i in range(1, formula.n + 1):
        xt, xf = f"xt({i})", f"xf({i})"
        if variant == "godel_or":
            lines.append(f"{xt} || {xf} :- 1.")
        elif variant == "luk_or":
            lines.append(f"{xt} + {xf} :- 1.")
            lines.append(f"{xt} :- {xt} + {xt}.")
            lines.append(f"{xf} :- {xf} + {xf}.")
        else:
            lines.append(f"{xt} * {xf} :- 1/2.")
            lines.append(f"{xt} * {xt} * {xt} :- {xt} * {xt}.")
            lines.append(f"{xf} * {xf} * {xf} :- {xf} * {xf}.")
    for i in range(formula.m + 1, formula.n + 1):
        lines.append(f"xt({i}) :- sat.")
        lines.append(f"xf({i}) :- sat.")
    lines.append("0 :- not sat.")
    if variant == "luk_or":
        lines.append("sat :- sat + sat.")
    elif variant == "luk_and":
        lines.append("sat :- 1/2.")
    for triple in formula.disjuncts:
        body = f" {conj} ".join(_sigma(lit) for lit in triple)
        lines.append(f"sat :- {body}.")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- coloring


def gen_coloring(vertices: int, edge_density: Fraction, den: int, seed: int) -> str:
    """Fuzzy graph coloring over a random undirected graph."""
    if vertices < 1:
        raise BenchError("need at least one vertex")
    if not 0 <= edge_density <= 1:
        raise BenchError(f"edge density must be within [0, 1], got {edge_density}")
    if den < 1:
        raise BenchError("denominator must be positive")
    rng = random.Random(seed)
    lines = []
    for x in range(1, vertices + 1):
        lines.append(f"black(v{x}) + white(v{x}) :- 1.")
    for x in range(1, vertices + 1):
        for y in range(x + 1, vertices + 1):
            if rng.random() >= edge_density:
                continue
            d = _frac(_degree(rng, den))
            lines.append(f"0 :- {d} * black(v{x}) * black(v{y}).")
            lines.append(f"0 :- {d} * white(v{x}) * white(v{y}).")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------- hamiltonian path


def gen_hampath(vertices: int, den: int, seed: int) -> str:
    """Fuzzy Hamiltonian path on the complete digraph over v1..vn.

    v1 is the start vertex.  Edge degrees bound the in/out split; walks
    propagate reach degrees by multiplication; every other vertex must
    be reached to at least its own degree (0 :- vertex * ~reached).
    """
    if vertices < 2:
        raise BenchError("need at least two vertices")
    if den < 1:
        raise BenchError("denominator must be positive")
    rng = random.Random(seed)
    names = [f"v{x}" for x in range(1, vertices + 1)]
    pairs = [(x, y) for x in names for y in names if x != y]
    lines = []
    for x, y in pairs:
        lines.append(f"edge({x},{y}) :- {_frac(_degree(rng, den))}.")
    for y in names[1:]:
        lines.append(f"vertex({y}) :- {_frac(_degree(rng, den))}.")
    for x, y in pairs:
        lines.append(f"in({x},{y}) + out({x},{y}) :- edge({x},{y}).")
    for y in names[1:]:
        lines.append(f"reached({y}) :- in(v1,{y}).")
    for x in names[1:]:
        for y in names[1:]:
            if x != y:
                lines.append(f"reached({y}) :- reached({x}) * in({x},{y}).")
    for y in names[1:]:
        lines.append(f"0 :- vertex({y}) * not reached({y}).")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ simple families


def gen_simple(kind: str, n: int, den: int) -> str:
    """The ``stratified`` chain or the ``oddcycle`` negative cycle."""
    if n < 1:
        raise BenchError("need at least one atom")
    if kind == "stratified":
        if den < 1:
            raise BenchError("denominator must be positive")
        # One real decrement keeps every chain value nonzero, so the
        # consequence operator derives one new atom per application.
        drop = Fraction(den - 1, den) if den > 1 else Fraction(1)
        lines = ["p(1) :- 1."]
        for i in range(1, n):
            d = drop if i == 1 else Fraction(1)
            lines.append(f"p({i + 1}) :- p({i}) * {_frac(d)}.")
        return "\n".join(lines) + "\n"
    if kind == "oddcycle":
        if n % 2 == 0:
            raise BenchError("the odd cycle needs an odd length")
        lines = [
            f"p({i}) :- not p({i % n + 1})." for i in range(1, n + 1)
        ]
        return "\n".join(lines) + "\n"
    raise BenchError(f"unknown family {kind!r}; pick stratified or oddcycle")
