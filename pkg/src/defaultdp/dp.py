"""Table algorithm for stable default sets over a pretty labeled tree decomposition.

Encoding used throughout:

* every theory variable owns one bit; a bag assignment is an ``int`` mask of
  the variables it makes true, and ``MO`` (the bit just above the variables)
  tags counter-witness entries that are models only, not refuting ones;
* states are ``ALPHA``, ``BETA``, ``GAMMA``; a state function is a sorted tuple
  of ``(default_index, state)`` pairs over the defaults in the bag;
* a witness proof is ``(sigma, A, B)`` and a counter-witness ``(rho, AC, BC)``,
  with frozensets of masks for A, B, AC, BC;
* a row is ``(Z, M, P, C)`` with frozensets throughout.
"""

from __future__ import annotations

import gc
import json
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

from .decomposition import LabeledTreeDecomposition, post_order, width
from .formula import compile_mask
from .theory import DefaultTheory

ALPHA, BETA, GAMMA = 0, 1, 2
STATE_NAMES = ("alpha", "beta", "gamma")

_EMPTY = frozenset()


class StructureError(RuntimeError):
    """The decomposition handed to the table algorithm is malformed."""


@dataclass(frozen=True)
class DpTuple:
    Z: frozenset
    M: frozenset
    P: frozenset
    C: frozenset
    origins: tuple

    @property
    def content(self) -> tuple:
        return (self.Z, self.M, self.P, self.C)


def _set_key(s) -> tuple:
    return tuple(sorted(s))


def _proof_key(p) -> tuple:
    sigma, a, b = p
    return (sigma, _set_key(a), _set_key(b))


def row_key(content) -> tuple:
    """Canonical sort key; defines the total order of rows inside a table."""
    z, m, p, c = content
    return (
        _set_key(z),
        _set_key(m),
        tuple(sorted(_proof_key(x) for x in p)),
        tuple(sorted(_proof_key(x) for x in c)),
    )


def _set_state(fn: tuple, d: int, state: int) -> tuple:
    return tuple(sorted(fn + ((d, state),)))


def _state(fn: tuple, d: int) -> int:
    for k, s in fn:
        if k == d:
            return s
    raise KeyError(d)


def _drop_state(fn: tuple, d: int) -> tuple:
    return tuple(x for x in fn if x[0] != d)


def _choose(masks: frozenset, bit: int) -> list:
    """Every set obtained by independently adding ``bit`` or not to each member."""
    members = sorted(masks)
    return [frozenset(x | (bit if pick else 0) for x, pick in zip(members, picks))
            for picks in product((False, True), repeat=len(members))]


def _with_bit(masks: frozenset, bit: int) -> frozenset:
    return masks | {x | bit for x in masks}


def _group(items) -> dict:
    """Index proofs (or join operands) by their state function."""
    groups: dict = {}
    for item in items:
        key = item[0] if isinstance(item[0], tuple) else item[1][0]
        groups.setdefault(key, []).append(item)
    return groups


class _Collector:
    """Accumulates produced rows, merging duplicates and their origins."""

    def __init__(self, prune: bool):
        self.rows: dict = {}
        self.prune = prune

    def add(self, z, m, p, c, origin) -> None:
        if self.prune and (not p or not m):
            return
        content = (z, frozenset(m), frozenset(p), frozenset(c))
        self.rows.setdefault(content, set()).add(origin)

    def table(self) -> list:
        ordered = sorted(self.rows, key=row_key)
        return [DpTuple(*content, tuple(sorted(self.rows[content]))) for content in ordered]


class TableAlgorithm:
    """Node handlers bound to one theory.

    ``counter_witnesses=False`` switches off all counter-witness processing,
    which leaves a procedure that only checks for satisfying default sets.
    It is meant for tests.
    """

    def __init__(self, theory: DefaultTheory, counter_witnesses: bool = True, prune: bool = True):
        self.theory = theory
        self.var_names = theory.variables
        self.bit = {a: 1 << i for i, a in enumerate(self.var_names)}
        self.mo = 1 << len(self.var_names)
        self.counter_witnesses = counter_witnesses
        self.prune = prune
        self._preds: dict = {}

    # -- helpers --

    def holds(self, index: int, part: str):
        """Memoised predicate ``mask -> bool`` for one default part."""
        key = (index, part)
        if key not in self._preds:
            check = compile_mask(self.theory.default(index).part(part), self.bit)
            cache: dict = {}

            def pred(mask, _check=check, _cache=cache, _mo=self.mo):
                mask &= ~_mo
                hit = _cache.get(mask)
                if hit is None:
                    hit = _cache[mask] = _check(mask)
                return hit

            self._preds[key] = pred
        return self._preds[key]

    def _collector(self) -> _Collector:
        return _Collector(self.prune)

    # -- handlers; each takes child tables (lists of DpTuple) and returns a table --

    def leaf(self) -> list:
        c = self._collector()
        c.rows[(_EMPTY, frozenset({0}), frozenset({((), _EMPTY, _EMPTY)}), _EMPTY)] = set()
        return c.table()

    def introduce_default(self, d: int, child: list) -> list:
        out = self._collector()
        for i, row in enumerate(child):
            z, m, p, cw = row.content
            # d in the witness set
            p_in = {(_set_state(s, d, GAMMA), a, b) for s, a, b in p}
            c_in = set()
            if self.counter_witnesses:
                c_in = {(_set_state(r, d, st), ac, bc) for r, ac, bc in cw for st in (ALPHA, BETA, GAMMA)}
                marked_m = frozenset(x | self.mo for x in m)
                for s, a, b in p:
                    for st in (ALPHA, BETA):
                        c_in.add((_set_state(s, d, st), a, marked_m | b))
            out.add(z | {d}, m, p_in, c_in, i)
            # d outside the witness set
            p_out = {(_set_state(s, d, st), a, b) for s, a, b in p for st in (ALPHA, BETA)}
            c_out = {(_set_state(r, d, st), ac, bc) for r, ac, bc in cw for st in (ALPHA, BETA)}
            out.add(z, m, p_out, c_out, i)
        return out.table()

    def introduce_variable(self, name: str, child: list) -> list:
        bit = self.bit[name]
        out = self._collector()
        for i, row in enumerate(child):
            z, m, p, cw = row.content
            p2 = {(s, a2, _with_bit(b, bit)) for s, a, b in p for a2 in _choose(a, bit)}
            c2 = {(r, ac2, _with_bit(bc, bit)) for r, ac, bc in cw for ac2 in _choose(ac, bit)}
            out.add(z, _with_bit(m, bit), p2, c2, i)
        return out.table()

    def remove_default(self, d: int, child: list) -> list:
        out = self._collector()
        for i, row in enumerate(child):
            z, m, p, cw = row.content
            out.add(
                z - {d},
                m,
                {(_drop_state(s, d), a, b) for s, a, b in p},
                {(_drop_state(r, d), ac, bc) for r, ac, bc in cw},
                i,
            )
        return out.table()

    def remove_variable(self, name: str, child: list) -> list:
        keep = ~self.bit[name]

        def proj(masks):
            return frozenset(x & keep for x in masks)

        out = self._collector()
        for i, row in enumerate(child):
            z, m, p, cw = row.content
            out.add(
                z,
                proj(m),
                {(s, proj(a), proj(b)) for s, a, b in p},
                {(r, proj(ac), proj(bc)) for r, ac, bc in cw},
                i,
            )
        return out.table()

    def label_gamma(self, d: int, child: list) -> list:
        sat = self.holds(d, "gamma")
        mo = self.mo
        out = self._collector()
        for i, row in enumerate(child):
            z, m, p, cw = row.content
            if d not in z:
                out.add(z, m, p, cw, i)
                continue
            p2 = {(s, a, frozenset(x for x in b if sat(x))) for s, a, b in p if all(sat(x) for x in a)}
            c2 = set()
            for r, ac, bc in cw:
                if _state(r, d) == GAMMA:
                    if all(sat(x) for x in ac):
                        c2.add((r, ac, frozenset(x for x in bc if sat(x))))
                else:
                    c2.add((r, ac, frozenset(x for x in bc if x & mo or sat(x))))
            out.add(z, frozenset(x for x in m if sat(x)), p2, c2, i)
        return out.table()

    def label_alpha(self, d: int, child: list) -> list:
        holds = self.holds(d, "alpha")
        strip = ~self.mo
        out = self._collector()
        for i, row in enumerate(child):
            z, m, p, cw = row.content
            p2 = set()
            for s, a, b in p:
                if _state(s, d) != ALPHA:
                    p2.add((s, a, b))
                    continue
                for x in m | b:
                    if not holds(x):
                        p2.add((s, a | {x}, b))
            c2 = set()
            for r, ac, bc in cw:
                if _state(r, d) != ALPHA:
                    c2.add((r, ac, bc))
                    continue
                for x in {y & strip for y in bc}:
                    if not holds(x):
                        c2.add((r, ac | {x}, bc))
            out.add(z, m, p2, c2, i)
        return out.table()

    def label_beta(self, d: int, child: list) -> list:
        holds = self.holds(d, "beta")
        out = self._collector()
        for i, row in enumerate(child):
            z, m, p, cw = row.content
            refuting = frozenset(x for x in m if holds(x))
            p2 = {(s, a, b | refuting if _state(s, d) == BETA else b) for s, a, b in p}
            c2 = {(r, ac, bc | refuting if _state(r, d) == BETA else bc) for r, ac, bc in cw}
            out.add(z, m, p2, c2, i)
        return out.table()

    def join(self, left: list, right: list) -> list:
        by_z: dict = {}
        for j, row in enumerate(right):
            by_z.setdefault(row.Z, []).append(j)
        marked: dict = {}
        out = self._collector()
        for i, lrow in enumerate(left):
            for j in by_z.get(lrow.Z, ()):
                rrow = right[j]
                m1, m2 = lrow.M, rrow.M
                p = set()
                right_proofs = _group(rrow.P)
                for s1, a1, b1 in lrow.P:
                    if not a1 <= m2:
                        continue
                    for _, a2, b2 in right_proofs.get(s1, ()):
                        if a2 <= m1:
                            p.add((s1, a1 | a2, (b1 & m2) | (b2 & m1)))
                c = set()
                if self.counter_witnesses:
                    rsides = _group(self._cw_sides(rrow))
                    for is_proof1, (r1, ac1, ref1, mo1) in self._cw_sides(lrow):
                        for is_proof2, (_, ac2, ref2, mo2) in rsides.get(r1, ()):
                            if is_proof1 and is_proof2:
                                continue
                            if ac1 <= mo2 and ac2 <= mo1:
                                both = mo1 & mo2
                                tagged = marked.get(both)
                                if tagged is None:
                                    tagged = marked[both] = frozenset(x | self.mo for x in both)
                                c.add((r1, ac1 | ac2, (ref1 & m2) | (ref2 & m1) | tagged))
                out.add(lrow.Z, m1 & m2, p, c, (i, j))
        return out.table()

    def _cw_sides(self, row: DpTuple) -> list:
        """Join operands for counter-witnesses: ``(is_proof, (state, AC, refuting, models))``.

        A witness proof can pair with a counter-witness from the other side;
        its refuting set is B and its model set is the row's M.
        """
        mo = self.mo
        sides = []
        for r, ac, bc in row.C:
            ref = frozenset(x for x in bc if not x & mo)
            models = frozenset(x & ~mo for x in bc if x & mo)
            sides.append((False, (r, ac, ref, models)))
        for s, a, b in row.P:
            sides.append((True, (s, a, b, row.M)))
        return sides

    def identity(self, child: list) -> list:
        out = self._collector()
        for i, row in enumerate(child):
            out.add(*row.content, i)
        return out.table()

    # -- dispatch --

    def handle(self, ltd: LabeledTreeDecomposition, node: int, kids: list) -> list:
        kind = ltd.node_type.get(node)
        if kind == "leaf":
            if ltd.bags[node]:
                raise StructureError(f"leaf {node} has a non-empty bag")
            return self.leaf()
        if kind == "join":
            a, b = ltd.children[node]
            if not ltd.bags[a] == ltd.bags[b] == ltd.bags[node]:
                raise StructureError(f"join {node} has mismatching child bags")
            return self.join(*kids)
        if kind in ("int", "rem"):
            v = ltd.changed_vertex(node)
            intro = kind == "int"
            if intro != (v in ltd.bags[node]):
                raise StructureError(f"{kind} node {node} has an inconsistent bag")
            if v.is_default:
                return (self.introduce_default if intro else self.remove_default)(v.key, kids[0])
            return (self.introduce_variable if intro else self.remove_variable)(v.key, kids[0])
        if kind == "label":
            label = ltd.label_of(node)
            if label is None:
                return self.identity(kids[0])
            part, d = label
            return {"alpha": self.label_alpha, "beta": self.label_beta, "gamma": self.label_gamma}[part](
                d, kids[0]
            )
        raise StructureError(f"node {node} has unknown type {kind!r}")


class TableMap:
    """Tables per LTD node, plus the decomposition and theory they came from."""

    def __init__(self, ltd: LabeledTreeDecomposition, theory: DefaultTheory, tables: dict, algorithm=None):
        self.ltd = ltd
        self.theory = theory
        self.tables = tables
        self.algorithm = algorithm
        self.token = object()

    def __getitem__(self, node: int) -> list:
        return self.tables[node]

    def replace(self, node: int, table: list) -> None:
        """Swap in a table; cursors created before this call become stale."""
        self.tables[node] = table
        self.token = object()

    @property
    def root_table(self) -> list:
        return self.tables[self.ltd.root]

    def accepting_rows(self) -> list:
        return [i for i, row in enumerate(self.root_table) if row_accepts(row)]

    def total_rows(self) -> int:
        return sum(len(t) for t in self.tables.values())


def dp_traverse(
    ltd: LabeledTreeDecomposition,
    theory: DefaultTheory,
    jobs: int = 1,
    counter_witnesses: bool = True,
) -> TableMap:
    """Compute every node's table bottom-up. With ``jobs > 1`` independent
    subtrees are handled by a thread pool."""
    # Tables hold no reference cycles; without this, every collection pass
    # rescans all finished tables and the traversal turns quadratic.
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        return _traverse(ltd, theory, jobs, counter_witnesses)
    finally:
        if was_enabled:
            gc.enable()


def _traverse(ltd, theory, jobs, counter_witnesses) -> TableMap:
    algo = TableAlgorithm(theory, counter_witnesses=counter_witnesses)
    tables: dict = {}
    order = post_order(ltd, ltd.root)
    if jobs <= 1:
        for node in order:
            tables[node] = algo.handle(ltd, node, [tables[c] for c in ltd.children[node]])
        return TableMap(ltd, theory, tables, algo)

    lock = threading.Lock()
    waiting = {n: len(ltd.children[n]) for n in order}
    done = threading.Event()
    errors = []

    with ThreadPoolExecutor(max_workers=jobs) as pool:

        def run(node):
            try:
                table = algo.handle(ltd, node, [tables[c] for c in ltd.children[node]])
            except BaseException as exc:  # surfaced in the caller
                errors.append(exc)
                done.set()
                return
            with lock:
                tables[node] = table
                up = ltd.parent[node]
                if up is None:
                    done.set()
                    return
                waiting[up] -= 1
                ready = waiting[up] == 0
            if ready:
                pool.submit(run, up)

        for n in order:
            if waiting[n] == 0:
                pool.submit(run, n)
        done.wait()
    if errors:
        raise errors[0]
    return TableMap(ltd, theory, tables, algo)


def row_accepts(row: DpTuple) -> bool:
    if row.Z or row.M != frozenset({0}):
        return False
    if not any(not b for _, _, b in row.P):
        return False
    return all(0 in bc for _, _, bc in row.C)


def root_accepts(root_table: list) -> bool:
    """Whether some root row certifies a stable default set."""
    return any(row_accepts(row) for row in root_table)


# -- size bound ---------------------------------------------------------------


def table_size_bound_log2(k: int) -> float:
    """log2 of the worst-case row count of a node table for decompositions of width ``k``."""
    return (k + 1) + 2 ** (k + 1) + 2 * 3 ** (k + 1) * 2 ** (2 ** (k + 2))


def within_size_bound(rows: int, k: int) -> bool:
    if rows <= 1:
        return True
    return math.log2(rows) <= table_size_bound_log2(max(k, 0))


# -- dump ---------------------------------------------------------------------


def _masks_json(masks, names, mo) -> list:
    out = []
    for x in sorted(masks):
        true = [a for i, a in enumerate(names) if x >> i & 1]
        if x & mo:
            true.append("@mo")
        out.append(true)
    return out


def _state_json(fn: tuple) -> dict:
    return {f"d{k}": STATE_NAMES[s] for k, s in fn}


def row_to_json(row: DpTuple, names: tuple) -> dict:
    mo = 1 << len(names)
    return {
        "Z": sorted(row.Z),
        "M": _masks_json(row.M, names, mo),
        "P": [
            {"sigma": _state_json(s), "A": _masks_json(a, names, mo), "B": _masks_json(b, names, mo)}
            for s, a, b in sorted(row.P, key=_proof_key)
        ],
        "C": [
            {"rho": _state_json(r), "AC": _masks_json(ac, names, mo), "BC": _masks_json(bc, names, mo)}
            for r, ac, bc in sorted(row.C, key=_proof_key)
        ],
        "origins": [list(o) if isinstance(o, tuple) else o for o in row.origins],
    }


def tables_to_json(tables: TableMap) -> str:
    names = tables.theory.variables
    doc = {
        "width": width(tables.ltd),
        "nodes": {
            str(n): [row_to_json(row, names) for row in tables[n]] for n in sorted(tables.tables)
        },
    }
    return json.dumps(doc, indent=1)
