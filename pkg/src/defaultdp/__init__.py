"""Stable default sets of propositional default theories via dynamic
programming on tree decompositions."""

from .formula import parse_formula, to_text
from .theory import Default, DefaultTheory, parse_theory, semi_primal_graph
from .solver import SolverConfig, count, decide_ext, enumerate_solutions

__all__ = [
    "Default",
    "DefaultTheory",
    "SolverConfig",
    "count",
    "decide_ext",
    "enumerate_solutions",
    "parse_formula",
    "parse_theory",
    "semi_primal_graph",
    "to_text",
]

__version__ = "0.1.0"
