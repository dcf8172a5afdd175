"""Surface syntax: parsing, pretty-printing and grounding.

The textual format, one rule per line (whitespace is free-form)::

    head :- body.        % rule
    head.                % fact        (body 1)
    :- body.             % constraint  (head 0)

Bodies combine terms with ``*`` (strong and), ``+`` (strong or), ``&&``
(min), ``||`` (max) and prefix ``not``; ``,`` is sugar for ``&&``.  Within
one parenthesis level only a single binary connective may appear — mixing
requires explicit parentheses.  Heads are atoms/constants joined by a
single connective.  Truth constants are decimals or fractions in [0, 1]
(``0.4``, ``2/5``, ``1``).  Atoms are lowercase identifiers with optional
ground-term or variable arguments (``trust(alice, X)``); variables start
uppercase and are expanded by grounding.  ``%`` starts a comment.  Names
beginning with ``__`` are reserved for generated atoms.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .core import (
    SINGLE,
    Atom,
    AtomRef,
    Bin,
    Conn,
    Const,
    DegreeError,
    Expr,
    FaspError,
    HeadExpr,
    Neg,
    Program,
    Rule,
    deg,
)


class ParseError(FaspError):
    """Syntax or lexical error, with source position."""

    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"line {line}:{col}: {message}")
        self.line = line
        self.col = col


class GroundError(FaspError):
    """Grounding failure (unsafe variable, empty term universe)."""


# ------------------------------------------------------------------ lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<WS>\s+|%[^\n]*)
  | (?P<IMPL>:-)
  | (?P<GOR>\|\|)
  | (?P<GAND>&&)
  | (?P<NUMBER>\d+\.\d+|\d+/\d+|\d+)
  | (?P<IDENT>[a-z_][A-Za-z0-9_]*)
  | (?P<VAR>[A-Z][A-Za-z0-9_]*)
  | (?P<DOT>\.)
  | (?P<COMMA>,)
  | (?P<LPAR>\()
  | (?P<RPAR>\))
  | (?P<STAR>\*)
  | (?P<PLUS>\+)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = match.lastgroup or ""
        lexeme = match.group()
        if kind == "IDENT" and lexeme == "not":
            kind = "NOT"
        if kind != "WS":
            tokens.append(_Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = match.end()
    tokens.append(_Token("EOF", "", line, col))
    return tokens


# ------------------------------------------------------- source-level AST


@dataclass(frozen=True)
class SAtom:
    """A possibly non-ground atom: predicate plus term/variable arguments."""

    pred: str
    args: tuple[str, ...] = ()

    def variables(self) -> tuple[str, ...]:
        return tuple(arg for arg in self.args if arg[0].isupper())

    def substitute(self, binding: dict[str, str]) -> "SAtom":
        return SAtom(self.pred, tuple(binding.get(arg, arg) for arg in self.args))

    def to_atom(self) -> Atom:
        if self.args:
            return Atom(f"{self.pred}({','.join(self.args)})")
        return Atom(self.pred)


@dataclass(frozen=True)
class SAtomRef:
    atom: SAtom


@dataclass(frozen=True)
class SConst:
    value: Fraction


@dataclass(frozen=True)
class SNeg:
    arg: "SExpr"


@dataclass(frozen=True)
class SBin:
    conn: Conn
    left: "SExpr"
    right: "SExpr"


SExpr = Union[SAtomRef, SConst, SNeg, SBin]


@dataclass(frozen=True)
class SHead:
    conn: str
    items: tuple[Union[SAtom, SConst], ...]


@dataclass(frozen=True)
class SRule:
    head: SHead
    body: SExpr
    line: int = 0


@dataclass(frozen=True)
class SourceProgram:
    rules: tuple[SRule, ...]

    def has_variables(self) -> bool:
        return any(_rule_variables(rule) for rule in self.rules)


def _expr_satoms(expr: SExpr, positive_only: bool = False) -> list[SAtom]:
    out: list[SAtom] = []
    stack: list[SExpr] = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, SAtomRef):
            out.append(node.atom)
        elif isinstance(node, SNeg):
            if not positive_only:
                stack.append(node.arg)
        elif isinstance(node, SBin):
            stack.append(node.right)
            stack.append(node.left)
    return out


def _rule_satoms(rule: SRule) -> list[SAtom]:
    atoms = [item for item in rule.head.items if isinstance(item, SAtom)]
    atoms.extend(_expr_satoms(rule.body))
    return atoms


def _rule_variables(rule: SRule) -> list[str]:
    seen: dict[str, None] = {}
    for atom in _rule_satoms(rule):
        for var in atom.variables():
            seen.setdefault(var, None)
    return list(seen)


# ----------------------------------------------------------------- parser

_BODY_OPS = {
    "STAR": Conn.LUK_AND,
    "PLUS": Conn.LUK_OR,
    "GAND": Conn.GODEL_AND,
    "GOR": Conn.GODEL_OR,
    "COMMA": Conn.GODEL_AND,
}


class _Parser:
    def __init__(self, tokens: list[_Token], allow_reserved: bool) -> None:
        self.tokens = tokens
        self.pos = 0
        self.allow_reserved = allow_reserved

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind: str, what: str) -> _Token:
        token = self.peek()
        if token.kind != kind:
            raise ParseError(
                f"expected {what}, found {token.text or 'end of input'!r}",
                token.line,
                token.col,
            )
        return self.advance()

    def fail(self, message: str) -> "ParseError":
        token = self.peek()
        return ParseError(message, token.line, token.col)

    # program := rule* EOF
    def parse_program(self) -> SourceProgram:
        rules = []
        while self.peek().kind != "EOF":
            rules.append(self.parse_rule())
        return SourceProgram(tuple(rules))

    def parse_rule(self) -> SRule:
        start = self.peek()
        if start.kind == "IMPL":
            self.advance()
            body = self.parse_expr()
            self.expect("DOT", "'.'")
            return SRule(SHead(SINGLE, (SConst(Fraction(0)),)), body, start.line)
        head = self.parse_head()
        if self.peek().kind == "DOT":
            self.advance()
            return SRule(head, SConst(Fraction(1)), start.line)
        self.expect("IMPL", "':-' or '.'")
        body = self.parse_expr()
        self.expect("DOT", "'.'")
        return SRule(head, body, start.line)

    def parse_head(self) -> SHead:
        items = [self.parse_head_item()]
        conn: Optional[Conn] = None
        while self.peek().kind in ("STAR", "PLUS", "GAND", "GOR"):
            token = self.advance()
            this = _BODY_OPS[token.kind]
            if conn is not None and conn is not this:
                raise ParseError(
                    "mixed connectives in rule head", token.line, token.col
                )
            conn = this
            items.append(self.parse_head_item())
        if len(items) == 1:
            return SHead(SINGLE, tuple(items))
        assert conn is not None
        return SHead(conn.value, tuple(items))

    def parse_head_item(self) -> Union[SAtom, SConst]:
        token = self.peek()
        if token.kind == "NUMBER":
            return SConst(self.parse_degree())
        if token.kind == "IDENT":
            return self.parse_atom()
        raise self.fail("expected atom or truth constant in rule head")

    # expr := term (op term)*   with a single op kind per level
    def parse_expr(self) -> SExpr:
        parts = [self.parse_term()]
        conn: Optional[Conn] = None
        while self.peek().kind in _BODY_OPS:
            token = self.advance()
            this = _BODY_OPS[token.kind]
            if conn is not None and conn is not this:
                raise ParseError(
                    "ambiguous connective mix; use parentheses",
                    token.line,
                    token.col,
                )
            conn = this
            parts.append(self.parse_term())
        expr = parts[0]
        for part in parts[1:]:
            assert conn is not None
            expr = SBin(conn, expr, part)
        return expr

    def parse_term(self) -> SExpr:
        token = self.peek()
        if token.kind == "NOT":
            self.advance()
            return SNeg(self.parse_term())
        if token.kind == "LPAR":
            self.advance()
            expr = self.parse_expr()
            self.expect("RPAR", "')'")
            return expr
        if token.kind == "NUMBER":
            return SConst(self.parse_degree())
        if token.kind == "IDENT":
            return SAtomRef(self.parse_atom())
        raise self.fail("expected atom, constant, 'not' or '('")

    def parse_degree(self) -> Fraction:
        token = self.expect("NUMBER", "truth constant")
        try:
            return deg(token.text)
        except DegreeError:
            raise ParseError(
                f"truth constant {token.text} outside [0, 1]", token.line, token.col
            ) from None

    def parse_atom(self) -> SAtom:
        name = self.expect("IDENT", "atom name")
        if name.text.startswith("_") and not (
            name.text.startswith("__") and self.allow_reserved
        ):
            raise ParseError(
                f"names starting with '_' are reserved: {name.text!r}",
                name.line,
                name.col,
            )
        if self.peek().kind != "LPAR":
            return SAtom(name.text)
        self.advance()
        args = [self.parse_arg()]
        while self.peek().kind == "COMMA":
            self.advance()
            args.append(self.parse_arg())
        self.expect("RPAR", "')'")
        return SAtom(name.text, tuple(args))

    def parse_arg(self) -> str:
        token = self.peek()
        if token.kind in ("IDENT", "VAR", "NUMBER"):
            self.advance()
            if self.peek().kind == "LPAR":
                raise self.fail("function terms are not supported")
            return token.text
        raise self.fail("expected a term or variable argument")


def parse(text: str, allow_reserved: bool = False) -> SourceProgram:
    """Parse program text into a (possibly non-ground) source program."""
    return _Parser(_tokenize(text), allow_reserved).parse_program()


# ------------------------------------------------------------- grounding


def ground(source: SourceProgram, fold: Optional[bool] = None) -> Program:
    """Expand variables over the ground-term universe and emit a core program.

    Safety requires every variable of a rule to occur in a positive
    (non-negated) body atom.  When the source contains variables (or
    ``fold=True``), fact-defined predicates are folded into their maximum
    degrees and rules whose bodies are identically 0 are dropped; on
    variable-free input grounding is the identity.
    """
    has_vars = source.has_variables()
    if fold is None:
        fold = has_vars

    if not has_vars:
        ground_rules = list(source.rules)
    else:
        universe = _term_universe(source)
        ground_rules = []
        seen: set[SRule] = set()
        for rule in source.rules:
            for grounded in _ground_rule(rule, universe):
                normalized = SRule(grounded.head, grounded.body, 0)
                if normalized not in seen:
                    seen.add(normalized)
                    ground_rules.append(grounded)

    if fold:
        ground_rules = _fold_facts(ground_rules)

    return Program(tuple(_to_core_rule(rule) for rule in ground_rules))


def load(text: str, fold: Optional[bool] = None, allow_reserved: bool = False) -> Program:
    """Parse and ground in one step."""
    return ground(parse(text, allow_reserved=allow_reserved), fold=fold)


def _term_universe(source: SourceProgram) -> list[str]:
    seen: dict[str, None] = {}
    for rule in source.rules:
        for atom in _rule_satoms(rule):
            for arg in atom.args:
                if not arg[0].isupper():
                    seen.setdefault(arg, None)
    return sorted(seen)


def _ground_rule(rule: SRule, universe: list[str]) -> list[SRule]:
    variables = _rule_variables(rule)
    if not variables:
        return [rule]

    positive_vars = {
        var
        for atom in _expr_satoms(rule.body, positive_only=True)
        for var in atom.variables()
    }
    for var in variables:
        if var not in positive_vars:
            raise GroundError(
                f"unsafe variable {var} in rule at line {rule.line}: "
                "it must occur in a positive body atom"
            )
    if not universe:
        raise GroundError(
            f"rule at line {rule.line} has variables but the program "
            "has no ground terms"
        )

    out = []
    for combo in itertools.product(universe, repeat=len(variables)):
        binding = dict(zip(variables, combo))
        out.append(
            SRule(
                _substitute_head(rule.head, binding),
                _substitute_expr(rule.body, binding),
                rule.line,
            )
        )
    return out


def _substitute_head(head: SHead, binding: dict[str, str]) -> SHead:
    items = tuple(
        item.substitute(binding) if isinstance(item, SAtom) else item
        for item in head.items
    )
    return SHead(head.conn, items)


def _substitute_expr(expr: SExpr, binding: dict[str, str]) -> SExpr:
    if isinstance(expr, SAtomRef):
        return SAtomRef(expr.atom.substitute(binding))
    if isinstance(expr, SNeg):
        return SNeg(_substitute_expr(expr.arg, binding))
    if isinstance(expr, SBin):
        return SBin(
            expr.conn,
            _substitute_expr(expr.left, binding),
            _substitute_expr(expr.right, binding),
        )
    return expr


# ---------------------------------------------------------- fact folding


def _is_fact_rule(rule: SRule) -> bool:
    return (
        len(rule.head.items) == 1
        and isinstance(rule.head.items[0], SAtom)
        and isinstance(rule.body, SConst)
    )


def _fold_facts(rules: list[SRule]) -> list[SRule]:
    """Inline predicates that are defined only by facts, then prune.

    Every body occurrence of such a predicate's atoms is replaced by the
    maximum fact degree (0 for instances without a fact), the facts
    themselves are removed, and rules whose bodies are then identically 0
    are dropped.
    """
    defined_preds: set[str] = set()
    non_fact_preds: set[str] = set()
    for rule in rules:
        for item in rule.head.items:
            if isinstance(item, SAtom):
                defined_preds.add(item.pred)
                if not _is_fact_rule(rule):
                    non_fact_preds.add(item.pred)
    fact_only = defined_preds - non_fact_preds

    degrees: dict[SAtom, Fraction] = {}
    for rule in rules:
        if _is_fact_rule(rule):
            atom = rule.head.items[0]
            assert isinstance(atom, SAtom) and isinstance(rule.body, SConst)
            if atom.pred in fact_only:
                degrees[atom] = max(degrees.get(atom, Fraction(0)), rule.body.value)

    out = []
    for rule in rules:
        if _is_fact_rule(rule) and rule.head.items[0].pred in fact_only:  # type: ignore[union-attr]
            continue
        body = _fold_expr(rule.body, fact_only, degrees)
        if _upper_bound(body) == 0:
            continue
        out.append(SRule(rule.head, body, rule.line))
    return out


def _fold_expr(
    expr: SExpr, fact_only: set[str], degrees: dict[SAtom, Fraction]
) -> SExpr:
    if isinstance(expr, SAtomRef) and expr.atom.pred in fact_only:
        return SConst(degrees.get(expr.atom, Fraction(0)))
    if isinstance(expr, SNeg):
        return SNeg(_fold_expr(expr.arg, fact_only, degrees))
    if isinstance(expr, SBin):
        return SBin(
            expr.conn,
            _fold_expr(expr.left, fact_only, degrees),
            _fold_expr(expr.right, fact_only, degrees),
        )
    return expr


def _bounds(expr: SExpr) -> tuple[Fraction, Fraction]:
    if isinstance(expr, SAtomRef):
        return Fraction(0), Fraction(1)
    if isinstance(expr, SConst):
        return expr.value, expr.value
    if isinstance(expr, SNeg):
        lo, hi = _bounds(expr.arg)
        return 1 - hi, 1 - lo
    lo1, hi1 = _bounds(expr.left)
    lo2, hi2 = _bounds(expr.right)
    return expr.conn.apply(lo1, lo2), expr.conn.apply(hi1, hi2)


def _upper_bound(expr: SExpr) -> Fraction:
    return _bounds(expr)[1]


def _to_core_rule(rule: SRule) -> Rule:
    items = tuple(
        item.to_atom() if isinstance(item, SAtom) else Const(item.value)
        for item in rule.head.items
    )
    head = HeadExpr(rule.head.conn, items)
    return Rule(head, _to_core_expr(rule.body))


def _to_core_expr(expr: SExpr) -> Expr:
    if isinstance(expr, SAtomRef):
        return AtomRef(expr.atom.to_atom())
    if isinstance(expr, SConst):
        return Const(expr.value)
    if isinstance(expr, SNeg):
        return Neg(_to_core_expr(expr.arg))
    return Bin(expr.conn, _to_core_expr(expr.left), _to_core_expr(expr.right))


# -------------------------------------------------------- pretty-printing


def frac_text(value: Fraction) -> str:
    return str(value)


def _operand_text(expr: Expr) -> str:
    """Render a chain operand; any binary subtree keeps explicit parentheses."""
    if isinstance(expr, Bin):
        return f"({expr_text(expr)})"
    return expr_text(expr)


def expr_text(expr: Expr) -> str:
    """Render an expression, flat along left-associated chains.

    Only the left spine of a same-connective chain is printed without
    parentheses, so parsing the output reproduces the exact tree.
    """
    if isinstance(expr, AtomRef):
        return expr.atom.name
    if isinstance(expr, Const):
        return frac_text(expr.value)
    if isinstance(expr, Neg):
        inner = expr_text(expr.arg)
        if isinstance(expr.arg, Bin):
            return f"not ({inner})"
        return f"not {inner}"
    parts: list[Expr] = []
    node: Expr = expr
    while isinstance(node, Bin) and node.conn is expr.conn:
        parts.append(node.right)
        node = node.left
    parts.append(node)
    parts.reverse()
    return f" {expr.conn.symbol} ".join(_operand_text(part) for part in parts)


def head_text(head: HeadExpr) -> str:
    parts = [
        item.name if isinstance(item, Atom) else frac_text(item.value)
        for item in head.items
    ]
    if head.conn == SINGLE:
        return parts[0]
    return f" {Conn(head.conn).symbol} ".join(parts)


def rule_text(rule: Rule) -> str:
    head = rule.head
    if head.conn == SINGLE and head.items[0] == Const(Fraction(0)):
        return f":- {expr_text(rule.body)}."
    if rule.body == Const(Fraction(1)):
        return f"{head_text(head)}."
    return f"{head_text(head)} :- {expr_text(rule.body)}."


def program_text(program: Program) -> str:
    """Render a ground program; ``load(program_text(p), fold=False)`` is identity."""
    return "\n".join(rule_text(rule) for rule in program.rules) + ("\n" if program.rules else "")
