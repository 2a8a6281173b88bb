"""Brute-force ground truth for stable default sets.

Two independent routes are provided. The set-based route checks the three
satisfiability conditions and subset-minimality on precomputed truth tables.
The fixed-point route rebuilds the candidate extension by forward chaining
with the entailment checks of :mod:`defaultdp.formula`. Both enumerate all
subsets, so they are limited to small theories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .formula import Not, ResourceLimitError, conjoin, entails, is_satisfiable, truth_table
from .theory import Default, DefaultTheory

MAX_DEFAULTS = 16
MAX_VARIABLES = 16


def _check_caps(theory: DefaultTheory, max_defaults: int, max_variables: int) -> None:
    if len(theory) > max_defaults:
        raise ResourceLimitError(f"{len(theory)} defaults exceed the oracle cap of {max_defaults}")
    if len(theory.variables) > max_variables:
        raise ResourceLimitError(
            f"{len(theory.variables)} variables exceed the oracle cap of {max_variables}"
        )


def _subsets(indices):
    indices = sorted(indices)
    for r in range(len(indices) + 1):
        for combo in combinations(indices, r):
            yield frozenset(combo)


class _Tables:
    """Truth tables of every default part over the theory's full variable set."""

    def __init__(self, theory: DefaultTheory):
        universe = theory.variables
        self.full = (1 << (1 << len(universe))) - 1
        self.alpha = {d.index: truth_table(d.alpha, universe) for d in theory}
        self.beta = {d.index: truth_table(d.beta, universe) for d in theory}
        self.gamma = {d.index: truth_table(d.gamma, universe) for d in theory}
        self._models: dict = {}

    def models(self, s: frozenset) -> int:
        if s not in self._models:
            table = self.full
            for i in s:
                table &= self.gamma[i]
            self._models[s] = table
        return self._models[s]


def conclusions(s, theory: DefaultTheory) -> list:
    return [theory.default(i).gamma for i in sorted(s)]


def is_alpha_sat(d: Default, s, theory: DefaultTheory) -> bool:
    return is_satisfiable(conclusions(s, theory) + [Not(d.alpha)])


def is_beta_sat(d: Default, s, theory: DefaultTheory) -> bool:
    return not is_satisfiable(conclusions(s, theory) + [d.beta])


def is_satisfying_default_set(s, theory: DefaultTheory) -> bool:
    s = frozenset(s)
    return all(
        d.index in s or is_alpha_sat(d, s, theory) or is_beta_sat(d, s, theory) for d in theory
    )


def _satisfying(tables: _Tables, theory: DefaultTheory, s: frozenset) -> bool:
    mods = tables.models(s)
    if not mods:
        return False
    for d in theory:
        i = d.index
        if i in s or mods & ~tables.alpha[i] or not mods & tables.beta[i]:
            continue
        return False
    return True


def _refuted_by_subset(tables: _Tables, theory: DefaultTheory, s: frozenset) -> bool:
    """Whether some proper subset of ``s`` still accounts for every default, with
    the justification test taken against ``s`` itself."""
    outer = tables.models(s)
    for sub in _subsets(s):
        if sub == s:
            continue
        mods = tables.models(sub)
        if all(
            d.index in sub or mods & ~tables.alpha[d.index] or not outer & tables.beta[d.index]
            for d in theory
        ):
            return True
    return False


def stable_default_sets(
    theory: DefaultTheory, max_defaults: int = MAX_DEFAULTS, max_variables: int = MAX_VARIABLES
) -> list:
    """All stable default sets, as sorted lists of frozensets of default indices."""
    _check_caps(theory, max_defaults, max_variables)
    tables = _Tables(theory)
    found = []
    for s in _subsets(d.index for d in theory):
        if _satisfying(tables, theory, s) and not _refuted_by_subset(tables, theory, s):
            found.append(s)
    return found


def satisfying_default_sets(
    theory: DefaultTheory, max_defaults: int = MAX_DEFAULTS, max_variables: int = MAX_VARIABLES
) -> list:
    _check_caps(theory, max_defaults, max_variables)
    tables = _Tables(theory)
    return [s for s in _subsets(d.index for d in theory) if _satisfying(tables, theory, s)]


# -- fixed-point route ----------------------------------------------------------


def reiter_check(s, theory: DefaultTheory) -> bool:
    """Whether the conclusions of ``s`` generate a stable extension.

    Forward-chains from the empty set, firing a default once its prerequisite
    is entailed and its justification is consistent with the conclusions of
    ``s``; accepts iff the result is logically equivalent to those conclusions.
    """
    target = conclusions(s, theory)
    if not is_satisfiable(target):
        return False
    applicable = [d for d in theory if is_satisfiable(target + [d.beta])]
    derived, fired = [], set()
    changed = True
    while changed:
        changed = False
        for d in applicable:
            if d.index not in fired and entails(derived, d.alpha):
                fired.add(d.index)
                derived.append(d.gamma)
                changed = True
    return entails(derived, conjoin(target)) and entails(target, conjoin(derived))


def generating_defaults(s, theory: DefaultTheory) -> frozenset:
    """Defaults whose prerequisite follows from, and whose justification is
    consistent with, the conclusions of ``s``."""
    target = conclusions(s, theory)
    return frozenset(
        d.index for d in theory if entails(target, d.alpha) and is_satisfiable(target + [d.beta])
    )


def reiter_stable(s, theory: DefaultTheory) -> bool:
    """``s`` yields a consistent extension and is exactly its generating set."""
    s = frozenset(s)
    return reiter_check(s, theory) and generating_defaults(s, theory) == s


def reiter_default_sets(
    theory: DefaultTheory, max_defaults: int = MAX_DEFAULTS, max_variables: int = MAX_VARIABLES
) -> list:
    _check_caps(theory, max_defaults, max_variables)
    return [s for s in _subsets(d.index for d in theory) if reiter_stable(s, theory)]


@dataclass
class OracleReport:
    satisfying_sets: list
    stable_sets: list
    reiter_sets: list
    reiter_confirmed: dict = field(default_factory=dict)

    @property
    def agreement(self) -> bool:
        return set(self.stable_sets) == set(self.reiter_sets) and all(self.reiter_confirmed.values())

    @property
    def counterexample(self):
        diff = set(self.stable_sets) ^ set(self.reiter_sets)
        if not diff:
            return None
        return sorted(min(diff, key=lambda s: (len(s), sorted(s))))

    def to_json(self) -> dict:
        def fmt(sets):
            return [sorted(s) for s in sets]

        return {
            "satisfying_sets": fmt(self.satisfying_sets),
            "stable_sets": fmt(self.stable_sets),
            "reiter_sets": fmt(self.reiter_sets),
            "reiter_confirmed": [
                {"defaults": sorted(s), "confirmed": ok} for s, ok in self.reiter_confirmed.items()
            ],
            "agreement": self.agreement,
            "counterexample": self.counterexample,
        }


def cross_validate(
    theory: DefaultTheory, max_defaults: int = MAX_DEFAULTS, max_variables: int = MAX_VARIABLES
) -> OracleReport:
    """Run both routes and compare their stable default sets."""
    satisfying = satisfying_default_sets(theory, max_defaults, max_variables)
    stable = stable_default_sets(theory, max_defaults, max_variables)
    reiter = reiter_default_sets(theory, max_defaults, max_variables)
    confirmed = {s: reiter_check(s, theory) for s in stable}
    return OracleReport(satisfying, stable, reiter, confirmed)
