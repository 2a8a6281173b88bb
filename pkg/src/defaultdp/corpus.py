"""Seeded random default theories for differential testing and benchmarks."""

from __future__ import annotations

import random

from .formula import BOTTOM, TOP, And, Formula, Iff, Implies, Not, Or, Var
from .theory import DefaultTheory

_BINARY = (And, Or, Implies, Iff)


def random_formula(rng: random.Random, names: list, max_depth: int) -> Formula:
    """Random formula of depth at most ``max_depth``; shallow shapes are favoured."""
    if max_depth == 0 or rng.random() < 0.45:
        roll = rng.random()
        if roll < 0.08:
            return TOP
        if roll < 0.12:
            return BOTTOM
        return Var(rng.choice(names))
    if rng.random() < 0.25:
        return Not(random_formula(rng, names, max_depth - 1))
    op = rng.choice(_BINARY)
    return op(random_formula(rng, names, max_depth - 1), random_formula(rng, names, max_depth - 1))


def random_theory(
    rng: random.Random, max_defaults: int = 5, max_variables: int = 5, max_depth: int = 3
) -> DefaultTheory:
    n_defaults = rng.randint(1, max_defaults)
    n_vars = rng.randint(1, max_variables)
    names = [f"x{i}" for i in range(n_vars)]
    triples = []
    for _ in range(n_defaults):
        triples.append(tuple(random_formula(rng, names, rng.randint(0, max_depth)) for _ in range(3)))
    return DefaultTheory.from_triples(triples)


def corpus(size: int, seed: int = 0, **kwargs) -> list:
    """``size`` theories drawn from one generator seeded with ``seed``."""
    rng = random.Random(seed)
    return [random_theory(rng, **kwargs) for _ in range(size)]


def chain_theory(n: int) -> DefaultTheory:
    """``x_i : T / x_i -> x_{i+1}`` for ``i < n``; a width-2 family whose
    decompositions grow linearly with ``n``."""
    return DefaultTheory.from_triples(
        (Var(f"x{i}"), TOP, Implies(Var(f"x{i}"), Var(f"x{i + 1}"))) for i in range(n)
    )
