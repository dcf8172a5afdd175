"""faspc: a compiler and solver toolkit for fuzzy answer set programs.

Fuzzy answer set programs assign truth degrees from [0, 1] to atoms and
combine them with Łukasiewicz and Gödel connectives.  This package parses
and grounds such programs, analyses their structure, rewrites them into
normal forms, compiles them into SMT theories over linear real arithmetic,
drives an external SMT solver, and independently verifies the resulting
fuzzy stable models.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .core import (
    Atom,
    AtomRef,
    Bin,
    Conn,
    Const,
    FaspError,
    HeadExpr,
    Interpretation,
    Neg,
    Program,
    Rule,
    deg,
)

__all__ = [
    "Atom",
    "AtomRef",
    "Bin",
    "Conn",
    "Const",
    "FaspError",
    "HeadExpr",
    "Interpretation",
    "Neg",
    "Program",
    "Rule",
    "deg",
    "__version__",
]
