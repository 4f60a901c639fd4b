"""Occurrence-level data-flow and alias analysis for a small ML-like language.

The pieces:

- ``syntax``: labeled abstract syntax, parser and printer
- ``runtime``: an interpreter that also records which occurrences each value depends on
- ``typesys``: a type system whose types over-approximate those dependencies
- ``agreement``: executable relations between runtime and typing states
- ``harness``: random programs and the differential soundness check
- ``cli``: the ``occflow`` command
"""

from .syntax import parse, render, label
from .runtime import run, eval_occurrence, uf_runtime
from .typesys import typecheck, derive_pi, derive_kappa0, type_value
from .harness import GenConfig, generate, check_soundness

__all__ = [
    "parse", "render", "label",
    "run", "eval_occurrence", "uf_runtime",
    "typecheck", "derive_pi", "derive_kappa0", "type_value",
    "GenConfig", "generate", "check_soundness",
]
