import random

import pytest

from cohesearch.lattice import (
    bell,
    build_lattice,
    canonical,
    construct_control_sets,
    merge_targets,
)
from cohesearch.query import parse_query
from cohesearch.synth import random_query


def test_bell_values():
    assert bell(0) == 1
    assert bell(1) == 1
    assert bell(4) == 15
    assert bell(7) == 877
    assert [bell(n) for n in range(8)] == [1, 1, 2, 5, 15, 52, 203, 877]


def test_bell_guard():
    with pytest.raises(ValueError):
        bell(21)
    with pytest.raises(ValueError):
        bell(-1)


def blocks(*groups):
    return canonical(frozenset(g) for g in groups)


def test_control_sets():
    sets = construct_control_sets(parse_query("(a (b c))"))
    assert [cs.items for cs in sets] == [
        (frozenset({0}), frozenset({1, 2})),
        (frozenset({1}), frozenset({2})),
    ]
    sets = construct_control_sets(parse_query("(a b)"))
    assert [cs.items for cs in sets] == [(frozenset({0}), frozenset({1}))]
    sets = construct_control_sets(parse_query("((a b)(c d))"))
    assert [cs.items for cs in sets] == [
        (frozenset({0, 1}), frozenset({2, 3})),
        (frozenset({0}), frozenset({1})),
        (frozenset({2}), frozenset({3})),
    ]


@pytest.mark.parametrize(
    "query,count",
    [
        ("(XML Query John Smith)", 15),
        ("(XML Query (John Smith))", 7),
        ("((XML Query) (John Smith))", 3),
        ("((XML Keyword Search) (Paul Cooper) (Mary Davis))", 9),
        ("(a b)", 2),
        ("(k)", 1),
    ],
)
def test_stack_counts(query, count):
    assert build_lattice(parse_query(query)).stack_count == count


def test_unproductive_partitions_removed():
    lat = build_lattice(parse_query("((XML Query) (John Smith))"))
    parts = lat.partitions()
    assert blocks({0}, {1}, {2}, {3}) in parts
    assert blocks({0, 1}, {2, 3}) in parts
    assert blocks({0, 1, 2, 3}) in parts
    # exactly [XQ, J, S] and [X, Q, JS] are pruned
    assert blocks({0, 1}, {2}, {3}) not in parts
    assert blocks({0}, {1}, {2, 3}) not in parts


def stirling(n, k):
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling(n - 1, k) + stirling(n - 1, k - 1)


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_flat_lattice_is_full_bell_with_stirling_levels(k):
    lat = build_lattice(parse_query("(" + " ".join(f"w{i}" for i in range(k)) + ")"))
    assert lat.stack_count == bell(k)
    per_level = {}
    for s in lat.stacks:
        per_level[s.level] = per_level.get(s.level, 0) + 1
    for level, n in per_level.items():
        assert n == stirling(k, k - level)


def test_levels_and_endpoints():
    lat = build_lattice(parse_query("(XML Query (John Smith))"))
    source = lat.stacks[lat.source_id]
    sink = lat.stacks[lat.sink_id]
    assert source.level == 0 and len(source.partition) == 4
    assert sink.level == 3 and len(sink.partition) == 1
    for s in lat.stacks:
        assert s.level == lat.occurrence_count - len(s.partition)


def test_blocks_respect_term_boundaries():
    rng = random.Random(41)
    vocab = [f"w{i}" for i in range(8)]
    for _ in range(40):
        ast = random_query(rng, vocab, max_occurrences=6, max_terms=3, max_nesting=3)
        lat = build_lattice(ast)
        term_occs = [ast.occ_set(t) for t in ast.terms()]
        for s in lat.stacks:
            for blk in s.partition:
                if len(blk) == 1:
                    continue
                for occ in term_occs:
                    inside = blk & occ
                    # no strict non-singleton subset of a term together with outside occurrences
                    if inside and inside != occ and blk - occ:
                        assert len(inside) == 1, (blk, occ)


def test_every_column_is_fed():
    rng = random.Random(43)
    vocab = [f"w{i}" for i in range(9)]
    shapes = [
        "((a b)((c d)(e f)))",
        "(a ((b c)(d e)))",
        "((a b c)(d e f))",
        "(a b ((c d e)(f g)))",
    ]
    asts = [parse_query(s) for s in shapes]
    asts += [random_query(rng, vocab, 6, 3, 3) for _ in range(40)]
    for ast in asts:
        lat = build_lattice(ast)  # raises LatticeError if a column is orphaned
        produced = {blk for s in lat.stacks for _, _, blk, t in s.merge_plan if t}
        for s in lat.stacks:
            for blk in s.partition:
                if len(blk) > 1:
                    assert blk in produced


def test_merge_targets_examples():
    ast = parse_query("(XML Query (John Smith))")
    lat = build_lattice(ast)
    source = lat.stacks[lat.source_id].partition
    x, q, j, s = (frozenset({i}) for i in range(4))
    assert merge_targets(lat, source, x, j) is None  # j hidden inside the term
    merged = merge_targets(lat, source, j, s)
    assert merged == blocks({0}, {1}, {2, 3})
    # flat: every merge admissible
    flat = build_lattice(parse_query("(a b c)"))
    fsrc = flat.stacks[flat.source_id].partition
    for a in range(3):
        for b in range(a + 1, 3):
            assert merge_targets(flat, fsrc, frozenset({a}), frozenset({b})) is not None


def test_merge_edges_cover_paths():
    lat = build_lattice(parse_query("((XML Query) (John Smith))"))
    src = lat.stacks[lat.source_id].partition
    mid = blocks({0, 1}, {2, 3})
    sink = blocks({0, 1, 2, 3})
    assert lat.merge_edges[mid] == (sink,)
    assert lat.merge_edges[sink] == ()
    # source reaches the mid partition only through double merges, not edges
    assert sink not in lat.merge_edges[src]


def test_dump_golden():
    ast = parse_query("(XML Query (John Smith))")
    lat = build_lattice(ast)
    labels = [o.keyword for o in ast.occurrences]
    assert lat.dump(labels).splitlines() == [
        "level 0: [xml | query | john | smith]",
        "level 1: [xml | query | john smith]",
        "level 1: [xml query | john | smith]",
        "level 2: [xml | query john smith]",
        "level 2: [xml query | john smith]",
        "level 2: [xml john smith | query]",
        "level 3: [xml query john smith]",
    ]


def test_largest_sublattice_size():
    assert build_lattice(parse_query("(a b c d)")).largest_sublattice_size == bell(4)
    assert (
        build_lattice(parse_query("(k0 k1 ((k2 k3 k4 k5)(k6 k7 k8 k9)))")).largest_sublattice_size
        == bell(4)
    )
    assert build_lattice(parse_query("((a b c d e f g)(x y z))")).largest_sublattice_size == bell(7)


def test_lattice_cached_by_shape():
    a = build_lattice(parse_query("(red (green blue))"))
    b = build_lattice(parse_query("(cat (dog fox))"))
    assert a is b
