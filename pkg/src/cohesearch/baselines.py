"""Reference semantics by exhaustive enumeration, plus SLCA/ELCA baselines.

This module is the ground truth the engine is checked against: it applies
the embedding conditions literally, with no cleverness. Everything here is
exponential in the number of keyword occurrences and guarded accordingly.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

from .ingest import InvertedIndex
from .query import QueryAst, Term
from .tree import DataTree, Dewey, is_ancestor_or_self, lca_of, mct_size


class ExplosionGuard(RuntimeError):
    """Candidate space too large for exhaustive enumeration."""


@dataclass(frozen=True)
class Embedding:
    """Total assignment occurrence id -> instance node."""

    assignment: tuple[Dewey, ...]

    def node_of(self, occ_id: int) -> Dewey:
        return self.assignment[occ_id]


def _instance_counts(tree: DataTree) -> dict[Dewey, Counter]:
    from .ingest import tokenize

    counts: dict[Dewey, Counter] = {}
    for node in tree.nodes:
        c = Counter(tokenize(node.label))
        if node.value:
            c.update(tokenize(node.value))
        if c:
            counts[node.dewey] = c
    return counts


def enumerate_embeddings(
    ast: QueryAst, tree: DataTree, guard: int = 10_000_000
) -> list[Embedding]:
    """All assignments satisfying the multiplicity and black-box conditions.

    Condition (a): occurrences of one keyword mapped to the same node need
    that node to contain the keyword at least that many times. Condition
    (b): for every term whose instances are not all one node, no external
    occurrence may map into the subtree rooted at the term's instance LCA.
    """
    node_counts = _instance_counts(tree)
    candidates: list[list[Dewey]] = []
    for occ in ast.occurrences:
        cands = [d for d, c in node_counts.items() if occ.keyword in c]
        if not cands:
            return []
        candidates.append(sorted(cands))

    total = 1
    for cands in candidates:
        total *= len(cands)
        if total > guard:
            raise ExplosionGuard(f"embedding space exceeds {guard}")

    terms = [t for t in ast.terms() if t.term_id != ast.root.term_id]
    term_occs = [sorted(ast.occ_set(t)) for t in terms]
    all_ids = set(range(len(ast.occurrences)))
    externals = [sorted(all_ids - set(ids)) for ids in term_occs]
    kw_of = [occ.keyword for occ in ast.occurrences]

    out: list[Embedding] = []
    for combo in itertools.product(*candidates):
        per_kw_node: Counter = Counter()
        for occ_id, node in enumerate(combo):
            per_kw_node[(kw_of[occ_id], node)] += 1
        ok = all(
            node_counts[node][kw] >= m for (kw, node), m in per_kw_node.items()
        )
        if not ok:
            continue
        for ids, ext in zip(term_occs, externals):
            nodes = [combo[i] for i in ids]
            first = nodes[0]
            if all(n == first for n in nodes):
                continue  # condition (b)(i)
            l = lca_of(nodes)
            if any(is_ancestor_or_self(l, combo[e]) for e in ext):
                ok = False
                break
        if ok:
            out.append(Embedding(tuple(combo)))
    return out


def oracle_answer(
    ast: QueryAst, tree: DataTree, guard: int = 10_000_000
) -> set[tuple[Dewey, int]]:
    """Exact answer set {(lca, minimal MCT size)} by enumeration."""
    best: dict[Dewey, int] = {}
    for emb in enumerate_embeddings(ast, tree, guard):
        root, size = mct_size(emb.assignment)
        if root not in best or size < best[root]:
            best[root] = size
    return {(root, size) for root, size in best.items()}


def all_lcas(keywords, idx: InvertedIndex, guard: int = 10_000_000) -> set[Dewey]:
    """Every LCA of one instance per keyword (flat conjunctive semantics)."""
    lists = []
    for kw in sorted(set(keywords)):
        plist = [d for d, _ in idx.instances(kw)]
        if not plist:
            return set()
        lists.append(plist)
    total = 1
    for plist in lists:
        total *= len(plist)
        if total > guard:
            raise ExplosionGuard(f"LCA tuple space exceeds {guard}")
    return {lca_of(combo) for combo in itertools.product(*lists)}


def slca(keywords, idx: InvertedIndex, guard: int = 10_000_000) -> set[Dewey]:
    """All-LCAs minus any LCA with a descendant LCA."""
    lcas = all_lcas(keywords, idx, guard)
    return {
        v
        for v in lcas
        if not any(v != u and is_ancestor_or_self(v, u) for u in lcas)
    }


def elca(keywords, idx: InvertedIndex, guard: int = 10_000_000) -> set[Dewey]:
    """LCAs keeping witnesses not claimed by a descendant ELCA.

    Computed by definition, deepest nodes first: a candidate stays if every
    keyword still has an instance in its subtree that is not under one of
    the already-accepted descendant ELCAs.
    """
    kws = sorted(set(keywords))
    lists = {}
    for kw in kws:
        plist = [d for d, _ in idx.instances(kw)]
        if not plist:
            return set()
        lists[kw] = plist

    candidates = sorted(all_lcas(kws, idx, guard), key=len, reverse=True)
    accepted: set[Dewey] = set()
    for v in candidates:
        covered = [u for u in accepted if v != u and is_ancestor_or_self(v, u)]
        ok = True
        for kw in kws:
            witnesses = (
                x
                for x in lists[kw]
                if is_ancestor_or_self(v, x)
                and not any(is_ancestor_or_self(u, x) for u in covered)
            )
            if next(witnesses, None) is None:
                ok = False
                break
        if ok:
            accepted.add(v)
    return accepted
