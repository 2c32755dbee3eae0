"""Core tree vocabulary: Dewey codes, nodes, document trees.

Dewey codes are plain tuples of non-negative ints. The root is the empty
tuple; child i of a node d is d + (i,). Lexicographic order on the tuples
equals preorder (document) order, and ancestry is prefix containment, so
all structural predicates reduce to tuple arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

Dewey = tuple[int, ...]

ROOT: Dewey = ()


def format_dewey(dewey: Dewey) -> str:
    """Render a Dewey code as dot-separated decimal; the root renders as 'ε'."""
    if not dewey:
        return "ε"
    return ".".join(str(step) for step in dewey)


def parse_dewey(text: str) -> Dewey:
    """Inverse of format_dewey. Accepts 'ε' or '' for the root."""
    text = text.strip()
    if text in ("ε", ""):
        return ()
    try:
        return tuple(int(part) for part in text.split("."))
    except ValueError:
        raise ValueError(f"not a Dewey code: {text!r}") from None


def is_ancestor_or_self(a: Dewey, b: Dewey) -> bool:
    """True iff a's steps are a (possibly empty or full) prefix of b's."""
    return len(a) <= len(b) and b[: len(a)] == a


def lca(a: Dewey, b: Dewey) -> Dewey:
    """Longest common prefix of two Dewey codes."""
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return a[:n]


def lca_of(nodes: Iterable[Dewey]) -> Dewey:
    it = iter(nodes)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("lca_of needs at least one node") from None
    for d in it:
        acc = lca(acc, d)
    return acc


def mct_size(nodes: Iterable[Dewey]) -> tuple[Dewey, int]:
    """Root and edge count of the minimal subtree connecting `nodes`.

    The root is the pairwise LCA; the size counts each edge of the union
    of root-to-member paths exactly once (equivalently, the number of
    distinct non-root nodes on those paths).
    """
    nodes = list(nodes)
    root = lca_of(nodes)
    depth = len(root)
    on_paths: set[Dewey] = set()
    for d in nodes:
        for k in range(depth + 1, len(d) + 1):
            on_paths.add(d[:k])
    return root, len(on_paths)


@dataclass(frozen=True)
class Node:
    """A tree node: element or attribute, with a label and optional text."""

    dewey: Dewey
    label: str
    value: Optional[str] = None

    def __post_init__(self):
        if not self.label:
            raise ValueError("node label must be non-empty")


@dataclass
class DataTree:
    """Preorder-sorted node sequence for one parsed document."""

    nodes: list[Node] = field(default_factory=list)

    def __post_init__(self):
        self._by_dewey = {n.dewey: n for n in self.nodes}
        if len(self._by_dewey) != len(self.nodes):
            raise ValueError("duplicate Dewey code in tree")
        for i in range(1, len(self.nodes)):
            if self.nodes[i - 1].dewey >= self.nodes[i].dewey:
                raise ValueError("nodes not in strict preorder")
        for n in self.nodes:
            if n.dewey and n.dewey[:-1] not in self._by_dewey:
                raise ValueError(f"missing parent of {format_dewey(n.dewey)}")

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, dewey: Dewey) -> bool:
        return dewey in self._by_dewey

    def node(self, dewey: Dewey) -> Node:
        return self._by_dewey[dewey]

    @property
    def depth(self) -> int:
        """Maximum node depth, counting the root level as 1."""
        if not self.nodes:
            return 0
        return max(len(n.dewey) for n in self.nodes) + 1

    def label_path(self, dewey: Dewey) -> str:
        labels = [self._by_dewey[dewey[:k]].label for k in range(len(dewey) + 1)]
        return "/".join(labels)
