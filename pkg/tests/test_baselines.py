import random

import pytest

from cohesearch.baselines import (
    ExplosionGuard,
    all_lcas,
    elca,
    enumerate_embeddings,
    oracle_answer,
    slca,
)
from cohesearch.ingest import build_index, tokenize
from cohesearch.query import parse_query
from cohesearch.synth import random_query, random_tree

from conftest import make_tree


def test_black_box_counterexample_rejected():
    # one author node carries both 'mary' and 'cooper': mapping paul->a1,
    # cooper->a2, mary->a2, davis->a3 would put mary inside the (paul cooper)
    # subtree, so it is not an embedding; here no valid embedding exists at all
    tree = make_tree(
        ((), "r", None),
        ((0,), "article", None),
        ((0, 0), "author", "paul"),
        ((0, 1), "author", "mary cooper"),
        ((0, 2), "author", "davis"),
    )
    ast = parse_query("((paul cooper)(mary davis))")
    assert enumerate_embeddings(ast, tree) == []


def test_flat_query_accepts_all_combinations():
    tree = make_tree(
        ((), "r", None),
        ((0,), "n", "a"),
        ((1,), "n", "a b"),
        ((2,), "n", "b"),
    )
    ast = parse_query("(a b)")
    embs = enumerate_embeddings(ast, tree)
    assert len(embs) == 4  # two a-instances x two b-instances


def test_multiplicity_condition():
    tree = make_tree(((), "r", None), ((0,), "n", "a"))
    ast = parse_query("(a a)")
    assert enumerate_embeddings(ast, tree) == []
    tree2 = make_tree(((), "r", None), ((0,), "n", "a a"))
    embs = enumerate_embeddings(ast, tree2)
    assert [e.assignment for e in embs] == [((0,), (0,))]


def test_oracle_two_leaf(two_leaf_tree):
    ast = parse_query("(a b)")
    assert oracle_answer(ast, two_leaf_tree) == {((0,), 2), ((), 3)}


def test_oracle_single_keyword(two_leaf_tree):
    ast = parse_query("(k)")
    assert oracle_answer(ast, two_leaf_tree) == set()
    ast = parse_query("(a)")
    assert oracle_answer(ast, two_leaf_tree) == {((0, 0), 0), ((1,), 0)}


def test_oracle_minimum_over_cohesive_embeddings_only():
    # the cheap 'a' inside y is unusable: the valid minimum takes the far one
    tree = make_tree(
        ((), "r", None),
        ((0,), "y", None),
        ((0, 0), "n", "b"),
        ((0, 1), "n", "c"),
        ((0, 2), "n", "a"),
        ((1,), "n", "a"),
    )
    ast = parse_query("(a (b c))")
    result = oracle_answer(ast, tree)
    assert ((0,), 3) not in result  # would need the inner 'a'
    assert result == {((), 4)}


def test_explosion_guard():
    tree = make_tree(
        ((), "r", None), *(((i,), "n", "a b") for i in range(8))
    )
    ast = parse_query("(a b a b)")
    with pytest.raises(ExplosionGuard):
        enumerate_embeddings(ast, tree, guard=100)


def test_slca_removes_ancestors():
    # nested match regions: the outer LCA is pruned
    tree = make_tree(
        ((), "r", None),
        ((0,), "s", None),
        ((0, 0), "n", "a"),
        ((0, 1), "n", "b"),
        ((1,), "n", "a"),
    )
    idx = build_index(tree)
    assert all_lcas({"a", "b"}, idx) == {(0,), ()}
    assert slca({"a", "b"}, idx) == {(0,)}


def test_slca_single_region(two_leaf_index):
    assert slca({"b"}, two_leaf_index) == {(0, 1)}


def test_slca_disjoint_siblings_both_kept():
    tree = make_tree(
        ((), "r", None),
        ((0,), "s", None),
        ((0, 0), "n", "a"),
        ((0, 1), "n", "b"),
        ((0, 2), "n", "c"),
        ((1,), "t", None),
        ((1, 0), "n", "a"),
        ((1, 1), "m", None),
        ((1, 1, 0), "n", "b"),
        ((1, 2), "n", "c"),
    )
    idx = build_index(tree)
    got = slca({"a", "b"}, idx)
    assert got == {(0,), (1,)}


def test_elca_keeps_ancestor_with_private_witnesses():
    tree = make_tree(
        ((), "r", None),
        ((0,), "s", None),
        ((0, 0), "n", "x"),
        ((0, 1), "n", "y"),
        ((1,), "n", "x"),
        ((2,), "n", "y"),
        ((3,), "pad", None),
        ((3, 0), "n", "x"),
        ((3, 1), "pad", None),
        ((4,), "pad", None),
        ((5,), "pad", None),
        ((5, 0), "pad", None),
    )
    idx = build_index(tree)
    assert slca({"x", "y"}, idx) == {(0,)}
    got = elca({"x", "y"}, idx)
    assert (0,) in got
    assert () in got  # witnessed by x@1 (or x@3.0) and y@2, outside the inner ELCA
    assert slca({"x", "y"}, idx) <= got


def test_elca_empty_when_keyword_missing(two_leaf_index):
    assert elca({"a", "zzz"}, two_leaf_index) == set()
    assert slca({"a", "zzz"}, two_leaf_index) == set()


def test_containment_chain_on_random_inputs():
    rng = random.Random(59)
    for _ in range(40):
        tree = random_tree(rng, max_nodes=30)
        idx = build_index(tree)
        keywords = set()
        for n in tree.nodes:
            keywords.update(tokenize(n.label))
            if n.value:
                keywords.update(tokenize(n.value))
        pick = set(rng.sample(sorted(keywords), min(3, len(keywords))))
        s, e, a = slca(pick, idx), elca(pick, idx), all_lcas(pick, idx)
        assert s <= e <= a


def test_flat_oracle_matches_all_lca_node_set():
    rng = random.Random(61)
    for _ in range(30):
        tree = random_tree(rng, max_nodes=25)
        idx = build_index(tree)
        keywords = sorted(
            {
                tok
                for n in tree.nodes
                for tok in tokenize(n.label) + (tokenize(n.value) if n.value else [])
            }
        )
        pick = rng.sample(keywords, min(rng.randint(2, 3), len(keywords)))
        if len(set(pick)) != len(pick):
            continue
        ast = parse_query("(" + " ".join(pick) + ")")
        nodes = {node for node, _ in oracle_answer(ast, tree)}
        assert nodes == all_lcas(set(pick), idx)
