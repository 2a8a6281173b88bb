"""Propositional formulas: AST, parser, printer and truth-table semantics.

Assignments are identified with the set of variables they make true, taken
over an explicit universe.  Satisfiability and entailment are decided by
enumerating that universe, so they are only meant for small variable sets
(bag-local checks and the brute-force oracle).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple

DEFAULT_VAR_CAP = 24

RESERVED_NAMES = frozenset({"T", "F"})


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnboundVariableError(KeyError):
    pass


class ResourceLimitError(RuntimeError):
    pass


class Formula:
    """Base class of the formula AST."""

    __slots__ = ()

    def __invert__(self) -> Formula:
        return Not(self)

    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Var(Formula):
    name: str

    def __post_init__(self):
        if not _IDENT.fullmatch(self.name) or self.name in RESERVED_NAMES:
            raise ValueError(f"invalid variable name {self.name!r}")


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


TOP = Top()
BOTTOM = Bottom()


class Assignment(NamedTuple):
    true: frozenset
    universe: frozenset

    @classmethod
    def of(cls, true: Iterable[str], universe: Iterable[str]) -> Assignment:
        true, universe = frozenset(true), frozenset(universe)
        if not true <= universe:
            raise ValueError(f"true-set {sorted(true - universe)} outside universe")
        return cls(true, universe)


# -- structure ---------------------------------------------------------------


@lru_cache(maxsize=None)
def variables(f: Formula) -> frozenset:
    """Return the set of variable names occurring in ``f``."""
    if isinstance(f, Var):
        return frozenset((f.name,))
    if isinstance(f, (Top, Bottom)):
        return frozenset()
    if isinstance(f, Not):
        return variables(f.arg)
    return variables(f.left) | variables(f.right)


def conjoin(formulas: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is ``Top``."""
    result = None
    for f in formulas:
        result = f if result is None else And(result, f)
    return TOP if result is None else result


def depth(f: Formula) -> int:
    if isinstance(f, (Top, Bottom, Var)):
        return 0
    if isinstance(f, Not):
        return 1 + depth(f.arg)
    return 1 + max(depth(f.left), depth(f.right))


# -- parsing -----------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN = re.compile(r"\s*(?:(<->)|(->)|([~&|()])|([A-Za-z_][A-Za-z0-9_]*))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise FormulaSyntaxError(f"unexpected character {text[start]!r}", start)
        tokens.append((m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()
    tokens.append(("", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def take(self) -> tuple[str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message: str):
        tok, pos = self.tokens[self.i]
        raise FormulaSyntaxError(f"{message}, found {tok or 'end of input'!r}", pos)

    def parse(self) -> Formula:
        f = self.iff()
        if self.peek() != "":
            self.fail("expected end of formula")
        return f

    def iff(self) -> Formula:
        f = self.imp()
        while self.peek() == "<->":
            self.take()
            f = Iff(f, self.imp())
        return f

    def imp(self) -> Formula:
        f = self.disj()
        if self.peek() == "->":
            self.take()
            return Implies(f, self.imp())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.peek() == "~":
            self.take()
            return Not(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.take()
            f = self.iff()
            if self.peek() != ")":
                self.fail("expected ')'")
            self.take()
            return f
        if tok == "T":
            self.take()
            return TOP
        if tok == "F":
            self.take()
            return BOTTOM
        if tok and _IDENT.fullmatch(tok):
            self.take()
            return Var(tok)
        self.fail("expected a formula")


def parse_formula(text: str) -> Formula:
    """Parse ASCII formula syntax (``~ & | -> <->``, constants ``T``/``F``).

    Precedence from tightest: ``~``, ``&``, ``|``, ``->``, ``<->``;
    ``->`` associates to the right, the others to the left.
    """
    return _Parser(text).parse()


# -- printing ----------------------------------------------------------------

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}
_SYMBOL = {Iff: "<->", Implies: "->", Or: "|", And: "&"}


def _prec(f: Formula) -> int:
    if isinstance(f, Not):
        return 5
    return _PREC.get(type(f), 6)


def to_text(f: Formula) -> str:
    """Render ``f`` in the parser's syntax with minimal parentheses."""
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Bottom):
        return "F"
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Not):
        inner = to_text(f.arg)
        return "~" + (f"({inner})" if _prec(f.arg) < 5 else inner)
    p = _PREC[type(f)]
    left, right = to_text(f.left), to_text(f.right)
    right_assoc = isinstance(f, Implies)
    if _prec(f.left) < p or (right_assoc and _prec(f.left) == p):
        left = f"({left})"
    if _prec(f.right) < p or (not right_assoc and _prec(f.right) == p):
        right = f"({right})"
    return f"{left} {_SYMBOL[type(f)]} {right}"


# -- semantics ---------------------------------------------------------------


def _eval(f: Formula, true: frozenset) -> bool:
    if isinstance(f, Var):
        return f.name in true
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Not):
        return not _eval(f.arg, true)
    if isinstance(f, And):
        return _eval(f.left, true) and _eval(f.right, true)
    if isinstance(f, Or):
        return _eval(f.left, true) or _eval(f.right, true)
    if isinstance(f, Implies):
        return (not _eval(f.left, true)) or _eval(f.right, true)
    if isinstance(f, Iff):
        return _eval(f.left, true) == _eval(f.right, true)
    raise TypeError(f"not a formula: {f!r}")


def evaluate(f: Formula, theta: Assignment) -> bool:
    """Truth value of ``f`` under ``theta``; every variable must be in its universe."""
    missing = variables(f) - theta.universe
    if missing:
        raise UnboundVariableError(f"unbound variables {sorted(missing)}")
    return _eval(f, theta.true)


def all_assignments(universe: Iterable[str]) -> Iterator[Assignment]:
    """All ``2^|universe|`` assignments, in order of increasing binary code."""
    names = sorted(universe)
    uni = frozenset(names)
    for code in range(1 << len(names)):
        yield Assignment(frozenset(n for i, n in enumerate(names) if code >> i & 1), uni)


def models(f: Formula, candidates: Iterable[Assignment]) -> set[Assignment]:
    """The candidates satisfying ``f``."""
    return {theta for theta in candidates if evaluate(f, theta)}


def compile_mask(f: Formula, bit: Mapping[str, int]) -> Callable[[int], bool]:
    """Compile ``f`` into a predicate on integer bitmasks.

    ``bit`` maps each variable of ``f`` to its bit value in the mask.
    """
    if isinstance(f, Var):
        b = bit[f.name]
        return lambda m: bool(m & b)
    if isinstance(f, Top):
        return lambda m: True
    if isinstance(f, Bottom):
        return lambda m: False
    if isinstance(f, Not):
        g = compile_mask(f.arg, bit)
        return lambda m: not g(m)
    left, right = compile_mask(f.left, bit), compile_mask(f.right, bit)
    if isinstance(f, And):
        return lambda m: left(m) and right(m)
    if isinstance(f, Or):
        return lambda m: left(m) or right(m)
    if isinstance(f, Implies):
        return lambda m: (not left(m)) or right(m)
    if isinstance(f, Iff):
        return lambda m: left(m) == right(m)
    raise TypeError(f"not a formula: {f!r}")


@lru_cache(maxsize=4096)
def truth_table(f: Formula, universe: tuple) -> int:
    """Bitset over codes ``0 .. 2^n - 1``: bit ``c`` is set iff code ``c`` satisfies ``f``.

    Code ``c`` makes ``universe[i]`` true iff bit ``i`` of ``c`` is set.
    """
    pred = compile_mask(f, {name: 1 << i for i, name in enumerate(universe)})
    table = 0
    for code in range(1 << len(universe)):
        if pred(code):
            table |= 1 << code
    return table


def _joint_universe(formulas: Iterable[Formula], cap: int) -> tuple:
    names = set()
    for f in formulas:
        names |= variables(f)
    if len(names) > cap:
        raise ResourceLimitError(f"{len(names)} variables exceed the enumeration cap of {cap}")
    return tuple(sorted(names))


def is_satisfiable(formulas: Iterable[Formula], cap: int = DEFAULT_VAR_CAP) -> bool:
    """Whether the conjunction of ``formulas`` has a model."""
    formulas = list(formulas)
    universe = _joint_universe(formulas, cap)
    table = (1 << (1 << len(universe))) - 1
    for f in formulas:
        table &= truth_table(f, universe)
        if not table:
            return False
    return True


def entails(formulas: Iterable[Formula], g: Formula, cap: int = DEFAULT_VAR_CAP) -> bool:
    """Whether every model of ``formulas`` over the joint variables satisfies ``g``."""
    formulas = list(formulas)
    universe = _joint_universe(formulas + [g], cap)
    table = (1 << (1 << len(universe))) - 1
    for f in formulas:
        table &= truth_table(f, universe)
    return table & ~truth_table(g, universe) == 0


def equivalent(f: Formula, g: Formula, cap: int = DEFAULT_VAR_CAP) -> bool:
    return entails([f], g, cap) and entails([g], f, cap)

