"""Brute-force enumeration of grid stable models.

Programs are compiled to integer opcode blocks over a common denominator
``D = lcm(k, constant denominators)``; a truth degree v is stored as the
integer v·D.  Body blocks read candidate values (the J array) outside
negation and reference values (the I array) inside it, so a single
compilation evaluates both plain satisfaction (J = I) and the reduct of
the program at I (J varying), without materializing reduct syntax.

Enumeration walks all assignments of the *enumerated* atoms over
Q_k = {0, 1/k, …, 1}.  Remaining atoms are *forced*: their value is the
maximum of their defining rule bodies — or its crispification to {0, 1}
when the atom also has a crispifying self-rule — computed in definition
order.  This extends grid candidates of a source program to candidates
of its rewritten form, letting stable sets be compared after projection.

Stability per candidate:

* programs whose heads are all single atoms or constants use the exact
  criterion — the candidate is stable iff it satisfies the program and
  equals the least fixpoint of the reduct's consequence operator (the
  fixpoint stays on the 1/D grid, so this path is exact, not merely
  grid-restricted);
* programs with compound heads search for a smaller reduct model over
  the same grid — minimality is then grid-restricted: a candidate with
  only off-grid smaller models is reported stable.

The inner loops live in a compiled extension (``_gridcy``) when built,
with a pure-Python twin (``_gridpy``) as fallback.
"""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (
    Atom,
    AtomRef,
    Bin,
    Conn,
    Const,
    FaspError,
    Interpretation,
    Neg,
    Program,
)
from .analysis import is_crisp_rule

try:
    from . import _gridcy as _kernel

    KERNEL = "compiled"
except ImportError:  # pragma: no cover - depends on the build environment
    from . import _gridpy as _kernel

    KERNEL = "pure"

from . import _gridpy


class GridError(FaspError):
    """The program cannot be compiled for grid enumeration."""


class GridBudgetError(GridError):
    """The enumeration space exceeds the caller's budget."""

    def __init__(self, candidates: int, budget: int) -> None:
        super().__init__(
            f"grid enumeration needs {candidates} candidates, over the budget "
            f"of {budget}; reduce k or the atom count"
        )
        self.candidates = candidates
        self.budget = budget


# Opcodes shared with the kernels (see _gridpy for the evaluator).
LOADJ, LOADI, PUSH, NEG, TNORM, TCONORM, OPMAX, OPMIN = range(8)

_CONN_OP = {
    Conn.LUK_AND: TNORM,
    Conn.LUK_OR: TCONORM,
    Conn.GODEL_OR: OPMAX,
    Conn.GODEL_AND: OPMIN,
}


@dataclass(frozen=True)
class CompiledGrid:
    """A program lowered to kernel arrays, plus the metadata to read
    results back."""

    atoms: tuple[Atom, ...]  # index order: enumerated, headless, forced
    n_enum: int
    denominator: int
    step: int
    spec: tuple


def _denominator(program: Program, k: int) -> int:
    d = k
    stack = [rule.body for rule in program.rules]
    for rule in program.rules:
        stack.extend(item for item in rule.head.items if isinstance(item, Const))
    while stack:
        node = stack.pop()
        if isinstance(node, Const):
            d = math.lcm(d, node.value.denominator)
        elif isinstance(node, Neg):
            stack.append(node.arg)
        elif isinstance(node, Bin):
            stack.append(node.left)
            stack.append(node.right)
    return d


class _Emitter:
    def __init__(self, index: dict[Atom, int], denominator: int) -> None:
        self.index = index
        self.denominator = denominator
        self.ops: list[int] = []
        self.max_stack = 0

    def block(self, emit) -> tuple[int, int]:
        start = len(self.ops)
        depth = emit(0)
        self.max_stack = max(self.max_stack, depth)
        return start, len(self.ops)

    def expr(self, node, inside_neg: bool):
        def emit(depth: int) -> int:
            return self._expr(node, inside_neg, depth)

        return self.block(emit)

    def _expr(self, node, inside_neg: bool, depth: int) -> int:
        if isinstance(node, AtomRef):
            self.ops.extend((LOADI if inside_neg else LOADJ, self.index[node.atom]))
            return depth + 1
        if isinstance(node, Const):
            scaled = node.value * self.denominator
            self.ops.extend((PUSH, int(scaled)))
            return depth + 1
        if isinstance(node, Neg):
            top = self._expr(node.arg, True, depth)
            self.ops.extend((NEG, 0))
            return top
        top = self._expr(node.left, inside_neg, depth)
        top = max(top, self._expr(node.right, inside_neg, depth + 1))
        self.ops.extend((_CONN_OP[node.conn], 0))
        return top

    def head(self, head) -> tuple[int, int]:
        def emit(depth: int) -> int:
            top = depth
            for position, item in enumerate(head.items):
                if isinstance(item, Atom):
                    self.ops.extend((LOADJ, self.index[item]))
                else:
                    self.ops.extend((PUSH, int(item.value * self.denominator)))
                top = max(top, depth + min(position + 1, 2))
                if position:
                    self.ops.extend((_CONN_OP[Conn(head.conn)], 0))
            return top

        return self.block(emit)


def _block_reads(ops: list[int], start: int, end: int) -> set[int]:
    reads = set()
    for i in range(start, end, 2):
        if ops[i] in (LOADJ, LOADI):
            reads.add(ops[i + 1])
    return reads


def compile_grid(
    program: Program, k: int, enumerate_atoms: Optional[tuple[Atom, ...]] = None
) -> CompiledGrid:
    """Lower a program to kernel arrays.

    *enumerate_atoms* defaults to all atoms of the program; any other
    atom must be forceable — defined by single-atom-head rules readable
    in definition order — or have no rules at all (pinned to 0).
    """
    if k < 1:
        raise GridError("grid resolution k must be at least 1")
    program_atoms = program.atoms()
    if enumerate_atoms is None:
        enum = tuple(program_atoms)
    else:
        enum = tuple(enumerate_atoms)
        if len(set(enum)) != len(enum):
            raise GridError("enumerated atoms must be distinct")

    enum_set = set(enum)
    rest = [atom for atom in program_atoms if atom not in enum_set]

    crisp_heads: set[Atom] = set()
    defining: dict[Atom, list] = {atom: [] for atom in rest}
    head_counts: dict[Atom, int] = {atom: 0 for atom in rest}
    first_defined: list[Atom] = []
    for rule in program.rules:
        head_items = [item for item in rule.head.items if isinstance(item, Atom)]
        crisp = is_crisp_rule(rule)
        for item in head_items:
            if item in enum_set:
                continue
            if item not in head_counts:
                continue
            if len(rule.head.items) > 1:
                raise GridError(
                    f"cannot force values for {item.name}: it shares a compound head"
                )
            if head_counts[item] == 0:
                first_defined.append(item)
            head_counts[item] += 1
            if crisp:
                crisp_heads.add(item)
            else:
                defining[item].append(rule)

    headless = [atom for atom in rest if head_counts[atom] == 0]
    atoms = tuple(enum) + tuple(headless) + tuple(first_defined)
    index = {atom: i for i, atom in enumerate(atoms)}

    denominator = _denominator(program, k)
    step = denominator // k

    emitter = _Emitter(index, denominator)
    rule_blocks: list[int] = []
    head_atom: list[int] = []
    for rule in program.rules:
        head_start, head_end = emitter.head(rule.head)
        body_start, body_end = emitter.expr(rule.body, False)
        rule_blocks.extend((head_start, head_end, body_start, body_end))
        if len(rule.head.items) == 1 and isinstance(rule.head.items[0], Atom):
            head_atom.append(index[rule.head.items[0]])
        elif len(rule.head.items) == 1:
            head_atom.append(-2)  # constraint: constant head
        else:
            head_atom.append(-1)  # compound head

    fresh_table: list[int] = []
    for position, atom in enumerate(first_defined):
        own = len(enum) + len(headless) + position
        bodies = []
        for rule in defining[atom]:
            start, end = emitter.expr(rule.body, False)
            reads = _block_reads(emitter.ops, start, end)
            if any(read >= own for read in reads):
                blocker = atoms[max(reads)].name
                raise GridError(
                    f"cannot force a value for {atom.name}: its definition reads "
                    f"{blocker}, which is not determined yet"
                )
            bodies.append((start, end))
        fresh_table.extend((own, 1 if atom in crisp_heads else 0, len(bodies)))
        for start, end in bodies:
            fresh_table.extend((start, end))

    spec = (
        len(atoms),
        len(enum),
        denominator,
        step,
        array("i", emitter.ops),
        array("i", rule_blocks),
        array("i", head_atom),
        len(program.rules),
        array("i", fresh_table),
        max(emitter.max_stack, 1),
    )
    return CompiledGrid(atoms, len(enum), denominator, step, spec)


def grid_candidate_count(n_enum: int, k: int) -> int:
    return (k + 1) ** n_enum


def grid_stable_models(
    program: Program,
    k: int,
    enumerate_atoms: Optional[tuple[Atom, ...]] = None,
    budget: int = 1_000_000,
    kernel=None,
) -> frozenset:
    """All grid-restricted stable models of *program* at resolution k.

    Returns full interpretations (forced atoms included); project with
    Interpretation.restrict to compare across rewrites.  Raises
    :class:`GridBudgetError` when the candidate space exceeds *budget*.
    """
    compiled = compile_grid(program, k, enumerate_atoms)
    candidates = grid_candidate_count(compiled.n_enum, k)
    if candidates > budget:
        raise GridBudgetError(candidates, budget)
    run = (kernel or _kernel).stable_vectors
    vectors = run(compiled.spec)
    result = []
    for vector in vectors:
        result.append(
            Interpretation(
                {
                    atom: Fraction(value, compiled.denominator)
                    for atom, value in zip(compiled.atoms, vector)
                }
            )
        )
    return frozenset(result)


def pure_kernel():
    """The pure-Python kernel (for differential testing of the compiled one)."""
    return _gridpy
