"""Seed-reproducible synthetic trees, queries, and benchmark corpora."""

from __future__ import annotations

import random

from .query import QueryAst, parse_query
from .tree import DataTree, Node


def random_tree(
    rng: random.Random,
    max_nodes: int = 60,
    max_depth: int = 6,
    max_children: int = 4,
    vocab: tuple[str, ...] = ("alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"),
    labels: tuple[str, ...] = ("a", "b", "c", "d", "e"),
    max_tokens_per_node: int = 3,
) -> DataTree:
    """Random labeled tree with 1..max_nodes nodes and bounded depth/fanout."""
    budget = rng.randint(1, max_nodes)
    nodes = [Node((), rng.choice(labels), _value(rng, vocab, max_tokens_per_node))]
    open_slots = [()]  # deweys that may still receive children
    child_count: dict[tuple, int] = {(): 0}
    made = 1
    while made < budget and open_slots:
        parent = rng.choice(open_slots)
        if len(parent) + 1 >= max_depth or child_count[parent] >= max_children:
            open_slots.remove(parent)
            continue
        dewey = parent + (child_count[parent],)
        child_count[parent] += 1
        child_count[dewey] = 0
        nodes.append(Node(dewey, rng.choice(labels), _value(rng, vocab, max_tokens_per_node)))
        open_slots.append(dewey)
        made += 1
    nodes.sort(key=lambda n: n.dewey)
    return DataTree(nodes=nodes)


def _value(rng: random.Random, vocab, max_tokens: int):
    k = rng.randint(0, max_tokens)
    if k == 0:
        return None
    return " ".join(rng.choice(vocab) for _ in range(k))


def random_query(
    rng: random.Random,
    vocab,
    max_occurrences: int = 5,
    max_terms: int = 2,
    max_nesting: int = 2,
) -> QueryAst:
    """Random cohesive query drawing keywords (with repetition) from vocab."""
    n_occ = rng.randint(2, max_occurrences)
    n_terms = rng.randint(0, max_terms)
    keywords = [rng.choice(vocab) for _ in range(n_occ)]

    def build(words: list[str], terms_left: int, depth: int) -> str:
        if terms_left > 0 and len(words) >= 3 and depth < max_nesting:
            # carve a proper sub-term of 2..len-1 words
            size = rng.randint(2, len(words) - 1)
            inner = build(words[:size], terms_left - 1, depth + 1)
            rest = words[size:]
            items = [inner] + rest
            rng.shuffle(items)
            return "(" + " ".join(items) + ")"
        return "(" + " ".join(words) + ")"

    return parse_query(build(keywords, n_terms, 0))


def instantiate_pattern(pattern: str, keywords: list[str]) -> str:
    """Fill an 'x' query pattern like (xx((xxxx)(xxxx))) with keywords."""
    out = []
    i = 0
    for ch in pattern:
        if ch == "x":
            if i >= len(keywords):
                raise ValueError("pattern needs more keywords than provided")
            out.append(" " + keywords[i] + " ")
            i += 1
        elif ch in "()":
            out.append(ch)
        elif ch.isspace():
            out.append(ch)
        else:
            raise ValueError(f"pattern may contain only 'x', parentheses, spaces: {ch!r}")
    if i != len(keywords):
        raise ValueError(f"pattern has {i} slots but {len(keywords)} keywords given")
    return "".join(out)


def pattern_slots(pattern: str) -> int:
    return pattern.count("x")


def uniform_record_tree(records: int, keywords: list[str]) -> DataTree:
    """Corpus of identical records under a flat root, every keyword in every field.

    Each record holds len(keywords) fields and each field contains all the
    keywords, so any cohesive pattern over those keywords is satisfiable
    (single-node terms) and every record contributes exactly the same
    evaluation work. Capping every posting list at a multiple of the field
    count selects whole records, which keeps push counts exactly affine in
    the number of instances.
    """
    text = " ".join(keywords)
    nodes = [Node((), "corpus", None)]
    for r in range(records):
        nodes.append(Node((r,), "record", None))
        for f in range(len(keywords)):
            nodes.append(Node((r, f), "field", text))
    return DataTree(nodes=nodes)


def zipf_tree(
    rng: random.Random,
    n_nodes: int,
    vocab_size: int = 40,
    max_depth: int = 8,
    max_children: int = 8,
) -> DataTree:
    """Larger benchmark tree with Zipf-ish keyword frequencies."""
    vocab = [f"w{i}" for i in range(vocab_size)]
    weights = [1.0 / (i + 1) for i in range(vocab_size)]
    nodes = [Node((), "root", None)]
    child_count: dict[tuple, int] = {(): 0}
    frontier = [()]
    while len(nodes) < n_nodes:
        parent = rng.choice(frontier)
        if len(parent) + 1 >= max_depth or child_count[parent] >= max_children:
            frontier.remove(parent)
            if not frontier:
                frontier = [()]
                child_count[()] = 0
            continue
        dewey = parent + (child_count[parent],)
        child_count[parent] += 1
        child_count[dewey] = 0
        words = rng.choices(vocab, weights=weights, k=rng.randint(1, 3))
        nodes.append(Node(dewey, "e", " ".join(words)))
        frontier.append(dewey)
    nodes.sort(key=lambda n: n.dewey)
    return DataTree(nodes=nodes)
