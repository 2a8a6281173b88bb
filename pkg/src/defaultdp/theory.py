"""Default theories, the theory file format, and the semi-primal graph."""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

from .formula import TOP, Formula, FormulaSyntaxError, parse_formula, to_text, variables

PARTS = ("alpha", "beta", "gamma")
PART_SYMBOL = {"alpha": "α", "beta": "β", "gamma": "γ"}


class TheorySyntaxError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Default:
    """A default rule ``prerequisite : justification / conclusion``."""

    index: int
    prerequisite: Formula
    justification: Formula
    conclusion: Formula

    @property
    def alpha(self) -> Formula:
        return self.prerequisite

    @property
    def beta(self) -> Formula:
        return self.justification

    @property
    def gamma(self) -> Formula:
        return self.conclusion

    def part(self, name: str) -> Formula:
        if name not in PARTS:
            raise KeyError(name)
        return getattr(self, name)

    @property
    def variables(self) -> frozenset:
        return variables(self.alpha) | variables(self.beta) | variables(self.gamma)

    @property
    def name(self) -> str:
        return f"d{self.index}"

    def __str__(self) -> str:
        return f"{to_text(self.alpha)} : {to_text(self.beta)} / {to_text(self.gamma)}"


@dataclass(frozen=True)
class DefaultTheory:
    defaults: tuple

    def __post_init__(self):
        indices = [d.index for d in self.defaults]
        if len(set(indices)) != len(indices):
            raise ValueError("default indices must be unique")

    @classmethod
    def from_triples(cls, triples: Iterable[tuple[Formula, Formula, Formula]]) -> DefaultTheory:
        return cls(tuple(Default(i, *t) for i, t in enumerate(triples, start=1)))

    @property
    def variables(self) -> tuple:
        names = set()
        for d in self.defaults:
            names |= d.variables
        return tuple(sorted(names))

    def __len__(self) -> int:
        return len(self.defaults)

    def __iter__(self):
        return iter(self.defaults)

    def default(self, index: int) -> Default:
        for d in self.defaults:
            if d.index == index:
                return d
        raise KeyError(index)

    def to_text(self) -> str:
        return "".join(f"{d} .\n" for d in self.defaults)


def normalize_knowledge_base(facts: Sequence[Formula], theory: DefaultTheory) -> DefaultTheory:
    """Turn every fact ``w`` into ``T : T / w``, placed before the theory's defaults.

    Indices are reassigned by position, starting at 1.
    """
    triples = [(TOP, TOP, w) for w in facts]
    triples += [(d.alpha, d.beta, d.gamma) for d in theory.defaults]
    return DefaultTheory.from_triples(triples)


_DEFAULT_PREFIX = re.compile(r"default\s*:")
_FACT_PREFIX = re.compile(r"fact(?:\s*:|\s+)")


def _formula_at(text: str, line: int) -> Formula:
    try:
        return parse_formula(text)
    except FormulaSyntaxError as exc:
        raise TheorySyntaxError(str(exc), line) from exc


def parse_theory(text: str) -> DefaultTheory:
    """Parse the line-oriented theory format.

    Each non-empty line holds one statement terminated by ``.``::

        default: P : J / C .     % the ``default:`` keyword is optional
        fact: F .                % becomes T : T / F

    ``%`` starts a comment.
    """
    facts, triples = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        if not line.endswith("."):
            raise TheorySyntaxError("statement must end with '.'", lineno)
        body = line[:-1].strip()
        if "/" in body:
            m = _DEFAULT_PREFIX.match(body)
            if m and ":" in body[m.end():]:
                body = body[m.end():]
            head, sep, conclusion = body.partition("/")
            if "/" in conclusion or head.count(":") != 1:
                raise TheorySyntaxError("expected 'P : J / C'", lineno)
            prerequisite, justification = head.split(":")
            triples.append(
                (
                    _formula_at(prerequisite, lineno),
                    _formula_at(justification, lineno),
                    _formula_at(conclusion, lineno),
                )
            )
            continue
        m = _FACT_PREFIX.match(body)
        if not m:
            raise TheorySyntaxError("expected a default 'P : J / C' or a fact", lineno)
        facts.append(_formula_at(body[m.end():], lineno))
    return normalize_knowledge_base(facts, DefaultTheory.from_triples(triples))


# -- semi-primal graph -------------------------------------------------------


class Vertex(NamedTuple):
    """Graph vertex; ``kind`` is ``"d"`` for defaults and ``"v"`` for variables.

    Defaults sort before variables; within a kind, by index or name.
    """

    kind: str
    key: object

    @classmethod
    def var(cls, name: str) -> Vertex:
        return cls("v", name)

    @classmethod
    def default(cls, index: int) -> Vertex:
        return cls("d", index)

    @property
    def is_default(self) -> bool:
        return self.kind == "d"

    def __str__(self) -> str:
        return f"d{self.key}" if self.is_default else str(self.key)

    def to_json(self):
        return self.key


class Graph:
    """Simple undirected graph over hashable, sortable vertices."""

    def __init__(self, vertices: Iterable = (), edges: Iterable = ()):
        self.adj: dict = {v: set() for v in vertices}
        for u, v in edges:
            self.add_edge(u, v)

    def add_edge(self, u, v) -> None:
        if u == v:
            raise ValueError(f"self-loop on {u}")
        if u not in self.adj or v not in self.adj:
            raise ValueError(f"edge {u}-{v} references an unknown vertex")
        self.adj[u].add(v)
        self.adj[v].add(u)

    @property
    def vertices(self) -> frozenset:
        return frozenset(self.adj)

    @property
    def edges(self) -> frozenset:
        return frozenset(frozenset((u, v)) for u in self.adj for v in self.adj[u])

    def neighbors(self, v) -> frozenset:
        return frozenset(self.adj[v])

    def __len__(self) -> int:
        return len(self.adj)

    def __repr__(self) -> str:
        return f"Graph({len(self.adj)} vertices, {len(self.edges)} edges)"


def semi_primal_graph(theory: DefaultTheory) -> Graph:
    """Variables and defaults as vertices; each default part's variables form a
    clique together with the default's vertex."""
    graph = Graph([Vertex.var(a) for a in theory.variables] + [Vertex.default(d.index) for d in theory])
    for d in theory:
        dv = Vertex.default(d.index)
        for name in PARTS:
            part_vars = sorted(variables(d.part(name)))
            for a in part_vars:
                graph.add_edge(dv, Vertex.var(a))
            for a, b in combinations(part_vars, 2):
                graph.add_edge(Vertex.var(a), Vertex.var(b))
    return graph
