import time
from dataclasses import dataclass, field

import pytest

from defaultdp.corpus import corpus
from defaultdp.decomposition import width
from defaultdp.dp import within_size_bound
from defaultdp.solver import first_solution, next_solution, solve
from defaultdp.theory import parse_theory

D1_TEXT = "T : a / a | b.\nT : ~a / ~b.\n"
D2_TEXT = "c : a / a | b.\nc : ~a / ~b.\nT : c / c.\nT : ~c / ~c.\n"
TWO_TEXT = "T : a / a.\nT : ~a / ~a.\n"

CORPUS_SIZE = 500
CORPUS_SEED = 0
TOUCH_CONSTANT = 3

_criterion_results: dict = {}
CRITERIA = {
    1: "worked examples decide and enumerate correctly, under 1 s each",
    2: "solver equals brute-force oracle on the 500-theory corpus",
    3: "fixed-point check and set-based stability agree",
    4: "decompositions valid, width kept, each label placed once",
    5: "table dump goldens for the first handlers",
    6: "table-size bound holds; runtime linear on width-2 chains",
    7: "rows touched per enumeration step at most 3x the node count",
}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    n = marker.args[0]
    ok = report.passed if report.when == "call" else not report.failed
    if report.when == "setup" and ok:
        return
    prev = _criterion_results.get(n, True)
    _criterion_results[n] = prev and ok


def pytest_terminal_summary(terminalreporter):
    if not _criterion_results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criterion_results):
        status = "PASS" if _criterion_results[n] else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  {CRITERIA.get(n, '')}")


@pytest.fixture
def d1():
    return parse_theory(D1_TEXT)


@pytest.fixture
def d2():
    return parse_theory(D2_TEXT)


@pytest.fixture
def two_solutions():
    return parse_theory(TWO_TEXT)


@dataclass
class CorpusRun:
    theory: object
    solutions: list
    seconds: float
    width: int
    nodes: int
    bound_ok: bool
    max_touches: int
    largest_table: int
    invariant_problems: list = field(default_factory=list)


def _invariant_problems(tables) -> list:
    """Row-level checks that every table must satisfy."""
    problems = []
    mo = tables.algorithm.mo
    for node, table in tables.tables.items():
        for row in table:
            if any(x & mo for x in row.M):
                problems.append(f"node {node}: marker in M")
            for sigma, a, b in row.P:
                if {d for d, s in sigma if s == 2} != set(row.Z):
                    problems.append(f"node {node}: proof states disagree with Z")
                if any(x & mo for x in a | b):
                    problems.append(f"node {node}: marker in A or B")
            for rho, ac, _ in row.C:
                if any(x & mo for x in ac):
                    problems.append(f"node {node}: marker in AC")
                # strictness is global: the differing default may already be removed
                if not {d for d, s in rho if s == 2} <= set(row.Z):
                    problems.append(f"node {node}: counter-witness exceeds Z")
            if not row.origins and tables.ltd.node_type[node] != "leaf":
                problems.append(f"node {node}: row without origins")
    return problems


@pytest.fixture(scope="session")
def corpus_runs():
    """Solve the fixed-seed corpus once and keep what the tests need."""
    runs = []
    for theory in corpus(CORPUS_SIZE, CORPUS_SEED):
        start = time.perf_counter()
        tables = solve(theory)
        solutions, touches = [], 0
        cursor = first_solution(tables)
        while cursor is not None:
            solutions.append(cursor.witness_set(tables))
            touches = max(touches, cursor.touches)
            cursor = next_solution(tables, cursor)
        elapsed = time.perf_counter() - start
        k = width(tables.ltd)
        runs.append(
            CorpusRun(
                theory=theory,
                solutions=solutions,
                seconds=elapsed,
                width=k,
                nodes=len(tables.tables),
                bound_ok=all(within_size_bound(len(t), k) for t in tables.tables.values()),
                max_touches=touches,
                largest_table=max(len(t) for t in tables.tables.values()),
                invariant_problems=_invariant_problems(tables),
            )
        )
    return runs
