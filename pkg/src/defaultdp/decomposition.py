"""Tree decompositions: heuristic construction, validation, and conversion into
pretty labeled tree decompositions (LTDs) that drive the table algorithm."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Iterable

from .formula import variables
from .theory import PART_SYMBOL, PARTS, DefaultTheory, Graph, Vertex, semi_primal_graph

HEURISTICS = ("min-fill", "min-degree")
NODE_TYPES = ("leaf", "int", "rem", "join", "label")
_PART_RANK = {p: i for i, p in enumerate(PARTS)}


class InvalidDecompositionError(ValueError):
    pass


# -- elimination orderings ---------------------------------------------------


def _fill_in(adj: dict, v) -> int:
    nbrs = list(adj[v])
    missing = 0
    for i, a in enumerate(nbrs):
        for b in nbrs[i + 1:]:
            if b not in adj[a]:
                missing += 1
    return missing


def elimination_order(graph: Graph, heuristic: str = "min-fill", seed: int = 0) -> list:
    """Greedy elimination ordering.

    Each step eliminates the vertex with the smallest score (fill-in edges or
    current degree). Ties go to the vertex that comes first in a seeded
    shuffle of the sorted vertex list, so the result is a pure function of
    ``(graph, heuristic, seed)``.
    """
    if heuristic not in HEURISTICS:
        raise ValueError(f"unknown heuristic {heuristic!r}; expected one of {HEURISTICS}")
    ranked = sorted(graph.vertices)
    random.Random(seed).shuffle(ranked)
    rank = {v: i for i, v in enumerate(ranked)}
    adj = {v: set(n) for v, n in graph.adj.items()}
    score = _fill_in if heuristic == "min-fill" else (lambda a, v: len(a[v]))
    order = []
    while adj:
        v = min(adj, key=lambda u: (score(adj, u), rank[u]))
        nbrs = adj.pop(v)
        for a in nbrs:
            adj[a].discard(v)
            adj[a] |= nbrs - {a}
        order.append(v)
    return order


# -- tree decompositions -----------------------------------------------------


@dataclass
class TreeDecomposition:
    """Rooted tree of bags. ``children`` lists each node's children in a fixed order."""

    bags: dict
    children: dict
    root: int

    def __post_init__(self):
        self.parent = {c: p for p, cs in self.children.items() for c in cs}
        self.parent.setdefault(self.root, None)

    @property
    def nodes(self) -> list:
        return post_order(self, self.root)

    def __len__(self) -> int:
        return len(self.bags)


def build_td(graph: Graph, order: list) -> TreeDecomposition:
    """Bucket-elimination decomposition along ``order``.

    Node ``i + 1`` holds the ``i``-th eliminated vertex together with its
    neighbours still present when it is eliminated.
    """
    if sorted(order) != sorted(graph.vertices):
        raise ValueError("order must be a permutation of the graph's vertices")
    if not order:
        return TreeDecomposition({1: frozenset()}, {1: []}, 1)
    position = {v: i for i, v in enumerate(order)}
    adj = {v: set(n) for v, n in graph.adj.items()}
    bags, parent = {}, {}
    for i, v in enumerate(order):
        later = adj.pop(v)
        for a in later:
            adj[a].discard(v)
            adj[a] |= later - {a}
        bags[i + 1] = frozenset(later | {v})
        if later:
            parent[i + 1] = min(position[a] for a in later) + 1
    root = len(order)
    children = {n: [] for n in bags}
    for n in sorted(bags):
        if n == root:
            continue
        children[parent.get(n, root)].append(n)
    return TreeDecomposition(bags, children, root)


def width(td: TreeDecomposition) -> int:
    if not td.bags:
        return -1
    return max(len(b) for b in td.bags.values()) - 1


def post_order(td: TreeDecomposition, start: int) -> list:
    """Nodes of the subtree at ``start``, children first, in stored child order."""
    out, stack = [], [(start, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            out.append(node)
            continue
        stack.append((node, True))
        for c in reversed(td.children[node]):
            stack.append((c, False))
    return out


def pre_order(td: TreeDecomposition, start: int) -> list:
    out, stack = [], [start]
    while stack:
        node = stack.pop()
        out.append(node)
        stack.extend(reversed(td.children[node]))
    return out


@dataclass(frozen=True)
class Violation:
    kind: str  # "structure", "vertex", "edge" or "connectedness"
    witnesses: tuple
    message: str = ""

    def __str__(self) -> str:
        return f"{self.kind} violation: {self.message}"


def _structure_violation(td: TreeDecomposition):
    if td.root not in td.bags:
        return Violation("structure", (td.root,), "root has no bag")
    if set(td.children) != set(td.bags):
        return Violation("structure", (), "children map and bag map disagree on nodes")
    seen = set()
    for n in post_order(td, td.root):
        if n in seen:
            return Violation("structure", (n,), f"node {n} reached twice")
        seen.add(n)
    if seen != set(td.bags):
        missing = tuple(sorted(set(td.bags) - seen))
        return Violation("structure", missing, f"nodes {list(missing)} unreachable from the root")
    return None


def validate_td(graph: Graph, td: TreeDecomposition):
    """Return ``None`` if ``td`` is a tree decomposition of ``graph``, else the first
    violation found (checked in the order: structure, vertices, edges, connectedness)."""
    problem = _structure_violation(td)
    if problem:
        return problem
    covered = set().union(*td.bags.values()) if td.bags else set()
    for v in sorted(graph.vertices):
        if v not in covered:
            return Violation("vertex", (v,), f"vertex {v} is in no bag")
    for e in sorted(tuple(sorted(e)) for e in graph.edges):
        if not any(set(e) <= bag for bag in td.bags.values()):
            return Violation("edge", e, f"edge {e[0]}-{e[1]} is in no bag")
    for v in sorted(covered):
        holders = {n for n, bag in td.bags.items() if v in bag}
        tops = [n for n in holders if td.parent[n] not in holders]
        if len(tops) > 1:
            return Violation(
                "connectedness", (v, *sorted(tops)), f"nodes containing {v} form {len(tops)} components"
            )
    return None


def decompose(graph: Graph, heuristic: str = "min-fill", seed: int = 0) -> TreeDecomposition:
    return build_td(graph, elimination_order(graph, heuristic, seed))


# -- labeled tree decompositions ----------------------------------------------


@dataclass
class LabeledTreeDecomposition(TreeDecomposition):
    """A nice decomposition whose ``label`` nodes each evaluate one default part.

    ``delta`` maps label nodes to a tuple of ``(part, default_index)`` pairs.
    """

    node_type: dict = field(default_factory=dict)
    delta: dict = field(default_factory=dict)

    def label_of(self, node: int):
        labels = self.delta.get(node, ())
        return labels[0] if labels else None

    def changed_vertex(self, node: int):
        """The vertex introduced or removed at an ``int``/``rem`` node."""
        (child,) = self.children[node]
        (v,) = self.bags[node] ^ self.bags[child]
        return v


def _chain(builder: _Builder, node: int, target: frozenset) -> int:
    bag = builder.bags[node]
    for v in sorted(bag - target):
        bag = bag - {v}
        node = builder.add(bag, [node])
    for v in sorted(target - bag):
        bag = bag | {v}
        node = builder.add(bag, [node])
    return node


class _Builder:
    def __init__(self):
        self.bags, self.children = {}, {}

    def add(self, bag: frozenset, children: list) -> int:
        n = len(self.bags) + 1
        self.bags[n] = frozenset(bag)
        self.children[n] = list(children)
        return n


def _make_nice(td: TreeDecomposition) -> _Builder:
    builder = _Builder()
    top = {}
    for n in post_order(td, td.root):
        bag = td.bags[n]
        heads = []
        for c in td.children[n]:
            heads.append(_chain(builder, top[c], bag))
        if not heads:
            heads.append(_chain(builder, builder.add(frozenset(), []), bag))
        head = heads[0]
        for other in heads[1:]:
            head = builder.add(bag, [head, other])
        top[n] = head
    root = _chain(builder, top[td.root], frozenset())
    builder.root = root
    return builder


def _classify(bags: dict, children: dict, node: int) -> str:
    kids = children[node]
    if not kids:
        return "leaf"
    if len(kids) == 2:
        return "join"
    grow = len(bags[node]) - len(bags[kids[0]])
    return {1: "int", -1: "rem", 0: "label"}[grow]


def make_pretty_ltd(td: TreeDecomposition, theory: DefaultTheory) -> LabeledTreeDecomposition:
    """Turn a decomposition of the semi-primal graph into a pretty LTD.

    Each ``(part, default)`` pair is attached to the first node in post-order
    whose bag holds the default and the part's variables; a label node with
    the same bag is inserted right above that node. Nodes are numbered
    1..n in post-order.
    """
    problem = validate_td(semi_primal_graph(theory), td)
    if problem:
        raise InvalidDecompositionError(str(problem))
    nice = _make_nice(td)

    pending = []
    for d in theory:
        for part in PARTS:
            need = {Vertex.default(d.index)} | {Vertex.var(a) for a in variables(d.part(part))}
            pending.append((part, d.index, frozenset(need)))
    labels_at = {}
    for n in post_order(_as_td(nice), nice.root):
        bag = nice.bags[n]
        rest = []
        for item in pending:
            (labels_at.setdefault(n, []) if item[2] <= bag else rest).append(item)
        pending = rest
    assert not pending, "valid decomposition must cover every label clique"

    # Splice label chains above their anchor nodes.
    bags, children = dict(nice.bags), {k: list(v) for k, v in nice.children.items()}
    delta = {}
    next_id = len(bags) + 1
    parent = {c: p for p, cs in children.items() for c in cs}
    root = nice.root
    for anchor in sorted(labels_at):
        items = sorted(labels_at[anchor], key=lambda it: (it[1], _PART_RANK[it[0]]))
        below = anchor
        for part, index, _ in items:
            n, next_id = next_id, next_id + 1
            bags[n] = bags[anchor]
            children[n] = [below]
            delta[n] = ((part, index),)
            below = n
        up = parent.get(anchor)
        if up is None:
            root = below
        else:
            children[up] = [below if c == anchor else c for c in children[up]]

    if not children[root]:
        # A lone empty leaf: add an identity label node as the root.
        n = next_id
        bags[n], children[n] = frozenset(), [root]
        root = n

    tmp = TreeDecomposition(bags, children, root)
    order = post_order(tmp, root)
    rename = {old: i for i, old in enumerate(order, start=1)}
    new_bags = {rename[o]: bags[o] for o in order}
    new_children = {rename[o]: [rename[c] for c in children[o]] for o in order}
    new_delta = {rename[o]: delta[o] for o in order if o in delta}
    types = {n: _classify(new_bags, new_children, n) for n in new_bags}
    return LabeledTreeDecomposition(new_bags, new_children, rename[root], types, new_delta)


def _as_td(builder: _Builder) -> TreeDecomposition:
    return TreeDecomposition(builder.bags, builder.children, builder.root)


def pretty_ltd_for(theory: DefaultTheory, heuristic: str = "min-fill", seed: int = 0) -> LabeledTreeDecomposition:
    return make_pretty_ltd(decompose(semi_primal_graph(theory), heuristic, seed), theory)


def ltd_violations(ltd: LabeledTreeDecomposition, theory: DefaultTheory) -> list[str]:
    """Check the structural LTD invariants; returns human-readable problems."""
    problems = []
    root = ltd.root
    if ltd.bags[root]:
        problems.append(f"root {root} has a non-empty bag")
    label_count = {}
    for n in post_order(ltd, root):
        kids, bag, kind = ltd.children[n], ltd.bags[n], ltd.node_type.get(n)
        labels = ltd.delta.get(n, ())
        if kind not in NODE_TYPES:
            problems.append(f"node {n} has unknown type {kind!r}")
            continue
        if len(kids) > 2:
            problems.append(f"node {n} has {len(kids)} children")
        if len(labels) > 1:
            problems.append(f"node {n} carries {len(labels)} labels")
        if labels and kind != "label":
            problems.append(f"{kind} node {n} carries labels")
        if kind == "leaf":
            if kids or bag:
                problems.append(f"leaf {n} must be childless with an empty bag")
        elif kind == "join":
            if len(kids) != 2 or any(ltd.bags[c] != bag for c in kids):
                problems.append(f"join {n} needs two children with equal bags")
        elif len(kids) != 1:
            problems.append(f"{kind} node {n} needs exactly one child")
        else:
            child_bag = ltd.bags[kids[0]]
            if kind == "label" and child_bag != bag:
                problems.append(f"label {n} changes the bag")
            if kind == "int" and not (child_bag < bag and len(bag) == len(child_bag) + 1):
                problems.append(f"int {n} must add exactly one vertex")
            if kind == "rem" and not (bag < child_bag and len(child_bag) == len(bag) + 1):
                problems.append(f"rem {n} must remove exactly one vertex")
        for part, index in labels:
            d = theory.default(index)
            need = {Vertex.default(index)} | {Vertex.var(a) for a in variables(d.part(part))}
            if not need <= bag:
                problems.append(f"label ({part}, d{index}) at {n} is not evaluable in its bag")
            label_count[(part, index)] = label_count.get((part, index), 0) + 1
    for d in theory:
        for part in PARTS:
            c = label_count.get((part, d.index), 0)
            if c != 1:
                problems.append(f"({part}, d{d.index}) labels {c} nodes")
    return problems


# -- export ------------------------------------------------------------------


def _bag_json(bag: Iterable[Vertex]) -> list:
    return [v.to_json() for v in sorted(bag)]


def to_json(ltd: LabeledTreeDecomposition) -> str:
    nodes = []
    for n in sorted(ltd.bags):
        nodes.append(
            {
                "id": n,
                "parent": ltd.parent[n],
                "bag": _bag_json(ltd.bags[n]),
                "type": ltd.node_type[n],
                "delta": [list(lbl) for lbl in ltd.delta.get(n, ())],
            }
        )
    return json.dumps({"root": ltd.root, "width": width(ltd), "nodes": nodes}, indent=2)


def to_dot(ltd: LabeledTreeDecomposition) -> str:
    lines = ["digraph ltd {", "  node [shape=box];"]
    for n in sorted(ltd.bags):
        bag = ", ".join(str(v) for v in sorted(ltd.bags[n]))
        text = f"t{n} {ltd.node_type[n]}\\n{{{bag}}}"
        for part, index in ltd.delta.get(n, ()):
            text += f"\\nδ=({PART_SYMBOL[part]},d{index})"
        lines.append(f'  t{n} [label="{text}"];')
    for n in sorted(ltd.bags):
        for c in ltd.children[n]:
            lines.append(f"  t{n} -> t{c};")
    lines.append("}")
    return "\n".join(lines) + "\n"
