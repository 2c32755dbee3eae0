import pytest

from cohesearch.ingest import build_index
from cohesearch.tree import DataTree, Node


def make_tree(*rows) -> DataTree:
    """Rows of (dewey tuple, label, value or None), any order."""
    return DataTree(nodes=sorted((Node(*r) for r in rows), key=lambda n: n.dewey))


@pytest.fixture
def two_leaf_tree():
    # r{x{a-leaf, b-leaf}, a-leaf}
    return make_tree(
        ((), "r", None),
        ((0,), "x", None),
        ((0, 0), "n", "a"),
        ((0, 1), "n", "b"),
        ((1,), "n", "a"),
    )


@pytest.fixture
def two_leaf_index(two_leaf_tree):
    return build_index(two_leaf_tree)


@pytest.fixture
def articles_tree():
    """Two matching articles: one compact (size 3), one spread out (size 6).

    Articles sit in separate volumes so embeddings mixing both articles cost
    strictly more than either article alone.
    """
    return make_tree(
        ((), "bib", None),
        ((0,), "volume", None),
        ((0, 0), "article", None),
        ((0, 0, 0), "title", "XML keyword search"),
        ((0, 0, 1), "author", "Paul Cooper"),
        ((0, 0, 2), "author", "Mary Davis"),
        ((1,), "volume", None),
        ((1, 0), "article", None),
        ((1, 0, 0), "section", None),
        ((1, 0, 0, 0), "w", "xml"),
        ((1, 0, 0, 1), "w", "keyword search"),
        ((1, 0, 1), "authors", None),
        ((1, 0, 1, 0), "author", "Paul Cooper"),
        ((1, 0, 1, 1), "author", "Mary Davis"),
    )


@pytest.fixture
def articles_index(articles_tree):
    return build_index(articles_tree)
