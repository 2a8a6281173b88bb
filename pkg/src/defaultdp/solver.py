"""Deciding, extracting, enumerating and counting stable default sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .decomposition import LabeledTreeDecomposition, pre_order, pretty_ltd_for
from .dp import TableMap, dp_traverse, root_accepts
from .theory import DefaultTheory


class StaleCursorError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    heuristic: str = "min-fill"
    seed: int = 0
    jobs: int = 1


def solve(theory: DefaultTheory, config: SolverConfig = SolverConfig()) -> TableMap:
    """Decompose ``theory`` and fill every table."""
    ltd = pretty_ltd_for(theory, config.heuristic, config.seed)
    return dp_traverse(ltd, theory, jobs=config.jobs)


def decide_ext(theory: DefaultTheory, config: SolverConfig = SolverConfig()) -> bool:
    """Whether ``theory`` has a consistent stable extension."""
    return root_accepts(solve(theory, config).root_table)


@dataclass(frozen=True)
class SolutionCursor:
    """One derivation through the tables.

    ``digits[0]`` picks an accepting root row; every further digit belongs to
    a non-leaf node (in pre-order) and picks one origin of that node's
    selected row, which fixes the selected rows of its children.
    ``selection`` maps each node to its selected row index.
    """

    digits: tuple
    selection: dict
    token: object
    touches: int = 0

    def witness_set(self, tables: TableMap) -> frozenset:
        out = set()
        for node, idx in self.selection.items():
            out |= tables[node][idx].Z
        return frozenset(out)


class _Walker:
    """Mixed-radix counter over the derivation choices of a table map."""

    def __init__(self, tables: TableMap, order: list, accepting: list):
        self.tables = tables
        self.ltd: LabeledTreeDecomposition = tables.ltd
        self.order = order
        self.accepting = accepting
        self.touches = 0

    def _origins(self, node: int, selection: dict) -> tuple:
        self.touches += 1
        return self.tables[node][selection[node]].origins

    def _apply(self, node: int, digit: int, selection: dict) -> None:
        origin = self._origins(node, selection)[digit]
        kids = self.ltd.children[node]
        picks = origin if isinstance(origin, tuple) else (origin,)
        for child, row in zip(kids, picks):
            selection[child] = row

    def settle(self, digits: list, start: int, selection: dict) -> None:
        """Recompute selections for positions ``start..`` given their digits."""
        if start == 0:
            self.touches += 1
            selection[self.ltd.root] = self.accepting[digits[0]]
            start = 1
        for pos in range(start, len(digits)):
            self._apply(self.order[pos - 1], digits[pos], selection)

    def radix(self, pos: int, selection: dict) -> int:
        if pos == 0:
            return len(self.accepting)
        return len(self._origins(self.order[pos - 1], selection))

    def first(self) -> Optional[SolutionCursor]:
        if not self.accepting:
            return None
        digits = [0] * (len(self.order) + 1)
        selection: dict = {}
        self.settle(digits, 0, selection)
        return SolutionCursor(tuple(digits), selection, self.tables.token, self.touches)

    def next(self, cursor: SolutionCursor) -> Optional[SolutionCursor]:
        digits = list(cursor.digits)
        selection = dict(cursor.selection)
        for pos in range(len(digits) - 1, -1, -1):
            if digits[pos] + 1 < self.radix(pos, selection):
                digits[pos] += 1
                for later in range(pos + 1, len(digits)):
                    digits[later] = 0
                self.settle(digits, pos, selection)
                return SolutionCursor(tuple(digits), selection, self.tables.token, self.touches)
        return None


def _walker(tables: TableMap) -> _Walker:
    # The node order and accepting root rows are computed once per table state,
    # so a call to next_solution only pays for the nodes it revisits.
    cached = getattr(tables, "_enum_cache", None)
    if cached is None or cached[0] is not tables.token:
        ltd = tables.ltd
        order = [n for n in pre_order(ltd, ltd.root) if ltd.children[n]]
        cached = (tables.token, order, tables.accepting_rows())
        tables._enum_cache = cached
    return _Walker(tables, cached[1], cached[2])


def first_solution(tables: TableMap) -> Optional[SolutionCursor]:
    """Cursor of the first derivation in table order, or ``None`` without one."""
    return _walker(tables).first()


def next_solution(tables: TableMap, cursor: Optional[SolutionCursor]) -> Optional[SolutionCursor]:
    """The derivation after ``cursor``, or ``None`` when exhausted.

    ``cursor.touches`` on the result counts the table rows read by this call.
    """
    if cursor is None:
        return None
    if cursor.token is not tables.token:
        raise StaleCursorError("tables changed since the cursor was created")
    return _walker(tables).next(cursor)


def iterate_solutions(tables: TableMap, limit: Optional[int] = None) -> Iterator[frozenset]:
    if limit is not None and limit <= 0:
        return
    produced = 0
    cursor = first_solution(tables)
    while cursor is not None:
        yield cursor.witness_set(tables)
        produced += 1
        if limit is not None and produced >= limit:
            return
        cursor = next_solution(tables, cursor)


def enumerate_solutions(
    theory: DefaultTheory, limit: Optional[int] = None, config: SolverConfig = SolverConfig()
) -> Iterator[frozenset]:
    """Stream the stable default sets of ``theory`` (as frozensets of indices)."""
    return iterate_solutions(solve(theory, config), limit)


def count(theory: DefaultTheory, config: SolverConfig = SolverConfig()) -> int:
    return sum(1 for _ in enumerate_solutions(theory, None, config))


def solution_record(s: frozenset, theory: DefaultTheory) -> dict:
    return {
        "defaults": sorted(s),
        "conclusions": [str(theory.default(i).gamma) for i in sorted(s)],
    }
