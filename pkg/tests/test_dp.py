import json
import random

import pytest

from defaultdp.corpus import random_theory
from defaultdp.decomposition import LabeledTreeDecomposition, pretty_ltd_for
from defaultdp.dp import (
    ALPHA,
    BETA,
    GAMMA,
    DpTuple,
    StructureError,
    TableAlgorithm,
    dp_traverse,
    root_accepts,
    row_to_json,
    table_size_bound_log2,
    tables_to_json,
    within_size_bound,
)
from defaultdp.oracle import satisfying_default_sets, stable_default_sets
from defaultdp.theory import DefaultTheory, Vertex, parse_theory

E = frozenset()


def row(z=(), m=(0,), p=(((), E, E),), c=(), origins=(0,)):
    return DpTuple(frozenset(z), frozenset(m), frozenset(p), frozenset(c), tuple(origins))


def example_chain(theory):
    """leaf, int a, int d1, (beta,d1), (alpha,d1), int b, (gamma,d1)."""
    a, b, d1 = Vertex.var("a"), Vertex.var("b"), Vertex.default(1)
    bags = {
        1: frozenset(),
        2: frozenset({a}),
        3: frozenset({a, d1}),
        4: frozenset({a, d1}),
        5: frozenset({a, d1}),
        6: frozenset({a, b, d1}),
        7: frozenset({a, b, d1}),
    }
    children = {n: ([n - 1] if n > 1 else []) for n in bags}
    types = {1: "leaf", 2: "int", 3: "int", 4: "label", 5: "label", 6: "int", 7: "label"}
    delta = {4: (("beta", 1),), 5: (("alpha", 1),), 7: (("gamma", 1),)}
    return LabeledTreeDecomposition(bags, children, 7, types, delta)


@pytest.fixture
def example_dump(d1):
    tables = dp_traverse(example_chain(d1), d1, counter_witnesses=False)
    names = d1.variables
    return {n: [row_to_json(r, names) for r in tables[n]] for n in tables.tables}


def proof(sigma, A=(), B=()):
    return {"sigma": sigma, "A": [list(x) for x in A], "B": [list(x) for x in B]}


class TestExampleChain:
    """Tables of the first nodes of the running example, in dump format."""

    def test_leaf(self, example_dump):
        assert example_dump[1] == [{"Z": [], "M": [[]], "P": [proof({})], "C": [], "origins": []}]

    def test_introduce_variable(self, example_dump):
        assert example_dump[2] == [{"Z": [], "M": [[], ["a"]], "P": [proof({})], "C": [], "origins": [0]}]

    def test_introduce_default(self, example_dump):
        out, inside = example_dump[3]
        assert out["Z"] == [] and inside["Z"] == [1]
        assert out["P"] == [proof({"d1": "alpha"}), proof({"d1": "beta"})]
        assert inside["P"] == [proof({"d1": "gamma"})]

    def test_beta_label_collects_refuting_assignment(self, example_dump):
        out, inside = example_dump[4]
        assert out["P"] == [proof({"d1": "alpha"}), proof({"d1": "beta"}, B=[["a"]])]
        assert inside["P"] == [proof({"d1": "gamma"})]

    def test_alpha_label_drops_alpha_state(self, example_dump):
        out, inside = example_dump[5]
        assert out["P"] == [proof({"d1": "beta"}, B=[["a"]])]
        assert inside["P"] == [proof({"d1": "gamma"})]

    def test_gamma_label_filters_models(self, example_dump):
        out, inside = example_dump[7]
        assert out["M"] == [[], ["a"], ["b"], ["a", "b"]]
        assert inside["M"] == [["a"], ["b"], ["a", "b"]]
        assert out["P"] == [proof({"d1": "beta"}, B=[["a"], ["a", "b"]])]


@pytest.fixture
def algo(d1):
    return TableAlgorithm(d1)


class TestHandlers:
    def test_leaf_is_pure(self, algo):
        assert algo.leaf() == algo.leaf()
        assert algo.leaf()[0].content == (E, frozenset({0}), frozenset({((), E, E)}), E)

    def test_empty_child_tables(self, algo):
        assert algo.introduce_default(1, []) == []
        assert algo.remove_default(1, []) == []
        assert algo.introduce_variable("a", []) == []

    def test_introduce_default_proof_counts(self, d1):
        algo = TableAlgorithm(d1, prune=False)
        proofs = [(((2, ALPHA),), frozenset({k}), E) for k in range(3)]
        out = algo.introduce_default(1, [row(p=proofs)])
        inside = next(r for r in out if 1 in r.Z)
        outside = next(r for r in out if 1 not in r.Z)
        assert len(inside.P) == 3 and len(outside.P) == 6
        # each proof seeds one counter-witness per non-gamma state
        assert len(inside.C) == 6 and not outside.C

    def test_gamma_top_keeps_models(self):
        theory = parse_theory("T : a / T.")
        algo = TableAlgorithm(theory)
        child = [row(z=[1], m=[0, 1], p=[(((1, GAMMA),), E, E)])]
        assert algo.label_gamma(1, child)[0].M == frozenset({0, 1})

    def test_gamma_skips_rows_without_default(self, d1):
        algo = TableAlgorithm(d1)
        child = [row(m=[0, 1, 2, 3], p=[(((1, BETA),), E, E)])]
        assert algo.label_gamma(1, child)[0].content == child[0].content

    def test_alpha_bottom_branches_over_pool(self):
        theory = parse_theory("F : T / a.")
        algo = TableAlgorithm(theory)
        child = [row(m=[0, 1], p=[(((1, ALPHA),), E, E)])]
        (out,) = algo.label_alpha(1, child)
        assert sorted(sorted(a) for _, a, _ in out.P) == [[0], [1]]

    def test_alpha_keeps_other_states(self, algo):
        child = [row(m=[0, 1], p=[(((1, BETA),), E, E)])]
        assert algo.label_alpha(1, child)[0].P == child[0].P

    def test_beta_bottom_leaves_b_empty(self):
        theory = parse_theory("T : F / a.")
        algo = TableAlgorithm(theory)
        child = [row(m=[0, 1], p=[(((1, BETA),), E, E)])]
        (out,) = algo.label_beta(1, child)
        assert all(not b for _, _, b in out.P)

    def test_beta_ignores_gamma_state(self, algo):
        child = [row(z=[1], m=[0, 1], p=[(((1, GAMMA),), E, E)])]
        assert algo.label_beta(1, child)[0].P == child[0].P

    def test_choose_expands_required_assignments(self, algo):
        bit_a, bit_b = algo.bit["a"], algo.bit["b"]
        child = [row(m=[0, bit_b], p=[((), frozenset({0, bit_b}), E)])]
        (out,) = algo.introduce_variable("a", child)
        assert len(out.P) == 4
        empty = algo.introduce_variable("a", [row()])[0]
        assert {a for _, a, _ in empty.P} == {E}
        assert out.M == frozenset({0, bit_b, bit_a, bit_a | bit_b})

    def test_remove_default_merges_and_unions_origins(self, algo):
        child = [
            row(p=[(((1, ALPHA),), E, E)], origins=(0,)),
            row(p=[(((1, BETA),), E, E)], origins=(0,)),
        ]
        (out,) = algo.remove_default(1, child)
        assert out.P == frozenset({((), E, E)}) and out.origins == (0, 1)

    def test_remove_default_clears_witness(self, algo):
        (out,) = algo.remove_default(1, [row(z=[1], p=[(((1, GAMMA),), E, E)])])
        assert out.Z == E and out.P == frozenset({((), E, E)})

    def test_remove_variable_projects_and_keeps_marker(self, algo):
        a, mo = algo.bit["a"], algo.mo
        cw = (((1, BETA),), E, frozenset({a, a | mo}))
        child = [row(z=[2], m=[0, a], p=[(((2, GAMMA),), E, E)], c=[cw])]
        (out,) = algo.remove_variable("a", child)
        assert out.M == frozenset({0})
        (_, _, bc), = out.C
        assert bc == frozenset({0, mo})

    def test_remove_variable_merges(self, algo):
        a = algo.bit["a"]
        child = [row(m=[0]), row(m=[a])]
        (out,) = algo.remove_variable("a", child)
        assert out.origins == (0, 1)

    def test_join_with_empty_bag_leaf_is_identity(self, d2):
        tables = dp_traverse(pretty_ltd_for(d2), d2)
        algo = TableAlgorithm(d2)
        root = tables.root_table
        joined = algo.join(root, algo.leaf())
        assert [r.content for r in joined] == [r.content for r in root]

    def test_join_needs_equal_witness_sets(self, algo):
        left = [row(z=[1], p=[(((1, GAMMA),), E, E)])]
        right = [row(z=[], p=[(((1, BETA),), E, E)])]
        assert algo.join(left, right) == []

    def test_unknown_node_type(self, d1):
        ltd = example_chain(d1)
        ltd.node_type[3] = "mystery"
        with pytest.raises(StructureError):
            dp_traverse(ltd, d1)

    def test_leaf_with_bag_rejected(self, d1):
        ltd = example_chain(d1)
        ltd.bags[1] = frozenset({Vertex.var("a")})
        with pytest.raises(StructureError):
            dp_traverse(ltd, d1)


class TestTraversal:
    def test_empty_theory_tables(self):
        theory = DefaultTheory(())
        tables = dp_traverse(pretty_ltd_for(theory), theory)
        leaf = TableAlgorithm(theory).leaf()
        for table in tables.tables.values():
            assert [r.content for r in table] == [r.content for r in leaf]
        assert root_accepts(tables.root_table)

    def test_examples(self, d1, d2):
        assert not root_accepts(dp_traverse(pretty_ltd_for(d1), d1).root_table)
        assert root_accepts(dp_traverse(pretty_ltd_for(d2), d2).root_table)

    def test_deterministic_dump(self, d2):
        first = tables_to_json(dp_traverse(pretty_ltd_for(d2), d2))
        second = tables_to_json(dp_traverse(pretty_ltd_for(d2), d2))
        assert first == second
        json.loads(first)

    @pytest.mark.parametrize("seed", range(8))
    def test_threaded_traversal_matches_sequential(self, seed):
        theory = random_theory(random.Random(seed), max_defaults=5, max_variables=4)
        ltd = pretty_ltd_for(theory)
        assert tables_to_json(dp_traverse(ltd, theory, jobs=4)) == tables_to_json(dp_traverse(ltd, theory))

    @pytest.mark.parametrize("seed", range(30))
    def test_without_counter_witnesses_finds_satisfying_sets(self, seed):
        theory = random_theory(random.Random(1000 + seed), max_defaults=4, max_variables=4)
        tables = dp_traverse(pretty_ltd_for(theory), theory, counter_witnesses=False)
        assert root_accepts(tables.root_table) == bool(satisfying_default_sets(theory))
        full = dp_traverse(pretty_ltd_for(theory), theory)
        assert root_accepts(full.root_table) == bool(stable_default_sets(theory))


class TestSizeBound:
    def test_bound_grows_with_width(self):
        assert table_size_bound_log2(0) < table_size_bound_log2(1) < table_size_bound_log2(2)
        assert table_size_bound_log2(0) == 1 + 2 + 2 * 3 * 16

    def test_within_bound(self):
        assert within_size_bound(0, 0) and within_size_bound(10**6, 1)
        assert not within_size_bound(2**200, 0)
