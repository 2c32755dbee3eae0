"""Partition lattices over keyword occurrences, reduced by cohesive terms.

Each evaluation stack corresponds to one partition of the query's keyword
occurrences. Grouping restricts which blocks may ever form: a block is
admissible only if it is a singleton or a union of at least two sibling
items (keywords or whole child terms) of a single term.

On top of admissibility, partitions that cannot contribute anything beyond
what finer kept partitions already produce are dropped:

  * a partition is useless when some term is already complete while an
    unrelated (incomparable) term is not, and
  * at most one term may be mid-merge (strictly between untouched and
    complete) in any kept partition.

Dropping can orphan a column whose only producers were pruned (deeply
nested sibling terms); a feeds fixpoint reinstates the finest admissible
producer in that case so every non-singleton column stays reachable from
the source. For a flat query of k keywords nothing is pruned and the
lattice has bell(k) stacks.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

from .query import QueryAst

Block = frozenset[int]
Partition = tuple[Block, ...]

_BELL_MAX = 20


@functools.cache
def bell(n: int) -> int:
    """Bell number B_n via the binomial recurrence; guarded to n <= 20."""
    if n < 0 or n > _BELL_MAX:
        raise ValueError(f"bell(n) supported for 0 <= n <= {_BELL_MAX}, got {n}")
    if n <= 1:
        return 1
    # B_n = sum_{i<n} C(n-1, i) B_i
    total = 0
    binom = 1
    for i in range(n):
        total += binom * bell(i)
        binom = binom * (n - 1 - i) // (i + 1)
    return total


@dataclass(frozen=True)
class ControlSet:
    """Admissible direct items of one term: keyword singletons and child-term atoms."""

    term_id: int
    items: tuple[Block, ...]

    @property
    def occurrences(self) -> Block:
        return frozenset().union(*self.items)


def construct_control_sets(ast: QueryAst) -> list[ControlSet]:
    """One control set per term (root included), in term-id order."""
    out = []
    for term in ast.terms():
        items = []
        for child in term.children:
            if hasattr(child, "occ_id"):
                items.append(frozenset({child.occ_id}))
            else:
                items.append(ast.occ_set(child))
        out.append(ControlSet(term.term_id, tuple(items)))
    return out


def canonical(blocks) -> Partition:
    return tuple(sorted(blocks, key=lambda b: (min(b), sorted(b))))


class LatticeError(RuntimeError):
    """Internal consistency violation while building a lattice."""


@dataclass(frozen=True)
class StackSpec:
    """Topology of one stack: its partition plus precomputed pop behavior."""

    stack_id: int
    partition: Partition
    level: int
    # merges this stack is responsible for: (col_i, col_j, merged block, target stack ids)
    merge_plan: tuple[tuple[int, int, Block, tuple[int, ...]], ...] = ()

    @property
    def columns(self) -> Partition:
        return self.partition

    @property
    def is_sink(self) -> bool:
        return len(self.partition) == 1


@dataclass(frozen=True)
class Lattice:
    """Immutable lattice topology shared by all evaluations of one query shape."""

    occurrence_count: int
    stacks: tuple[StackSpec, ...]
    source_id: int
    sink_id: int
    singleton_routes: dict[int, tuple[int, ...]]
    term_blocks: frozenset[Block]  # non-root complete-term occurrence sets
    admissible_blocks: frozenset[Block]  # non-singleton admissible blocks
    merge_edges: dict[Partition, tuple[Partition, ...]]
    largest_sublattice_size: int

    @property
    def stack_count(self) -> int:
        return len(self.stacks)

    @property
    def max_level(self) -> int:
        return self.stacks[-1].level if self.stacks else 0

    def partitions(self) -> set[Partition]:
        return {s.partition for s in self.stacks}

    def dump(self, labels: list[str] | None = None) -> str:
        """Level-grouped textual listing, one partition per line."""

        def name(occ: int) -> str:
            return labels[occ] if labels else str(occ)

        def fmt(p: Partition) -> str:
            return "[" + " | ".join(
                " ".join(name(o) for o in sorted(b)) for b in p
            ) + "]"

        lines = []
        for level in range(self.max_level + 1):
            for s in self.stacks:
                if s.level == level:
                    lines.append(f"level {level}: {fmt(s.partition)}")
        return "\n".join(lines)


def _signature_control_sets(signature) -> list[tuple[Block, ...]]:
    """Items per term from a keyword-free AST signature (root term first)."""
    sets: list[tuple[Block, ...]] = []

    def occs(node) -> frozenset[int]:
        if isinstance(node, int):
            return frozenset({node})
        return frozenset().union(*(occs(c) for c in node))

    def walk(node):
        items = tuple(
            frozenset({c}) if isinstance(c, int) else occs(c) for c in node
        )
        sets.append(items)
        for c in node:
            if not isinstance(c, int):
                walk(c)

    walk(signature)
    return sets


def build_lattice(ast: QueryAst) -> Lattice:
    """Build the reduced lattice for a query; cached per query shape."""
    return _build(ast.structure_signature())


@functools.lru_cache(maxsize=512)
def _build(signature) -> Lattice:
    items_per_term = _signature_control_sets(signature)
    occ_sets = [frozenset().union(*items) for items in items_per_term]
    n = len(occ_sets[0])

    # admissible non-singleton blocks, each owned by exactly one term
    owner: dict[Block, int] = {}
    for ti, items in enumerate(items_per_term):
        for r in range(2, len(items) + 1):
            for combo in itertools.combinations(items, r):
                owner.setdefault(frozenset().union(*combo), ti)

    def splits(block: Block) -> list[tuple[Block, Block]]:
        """Admissible two-way splits of a block, from its owner's items."""
        items = [it for it in items_per_term[owner[block]] if it <= block]
        first, rest = items[0], items[1:]
        out = []
        for r in range(len(rest) + 1):
            for combo in itertools.combinations(rest, r):
                a = first.union(*combo) if combo else first
                b = block - a
                if b:
                    out.append((a, b))
        return out

    source = canonical(frozenset({i}) for i in range(n))
    seen: set[Partition] = {source}
    frontier = [source]
    while frontier:
        nxt = []
        for part in frontier:
            for a, b in itertools.combinations(part, 2):
                merged = a | b
                if merged not in owner:
                    continue
                q = canonical([blk for blk in part if blk is not a and blk is not b] + [merged])
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt

    def comparable(t1: int, t2: int) -> bool:
        return occ_sets[t1] <= occ_sets[t2] or occ_sets[t2] <= occ_sets[t1]

    def keep(part: Partition) -> bool:
        block_of: dict[int, Block] = {}
        for blk in part:
            for o in blk:
                block_of[o] = blk
        complete, incomplete = [], []
        for ti, occ in enumerate(occ_sets):
            (complete if occ <= block_of[next(iter(occ))] else incomplete).append(ti)
        in_progress = {
            owner[blk]
            for blk in part
            if owner.get(blk) is not None and blk != occ_sets[owner[blk]]
        }
        if len(in_progress) >= 2:
            return False
        return not any(
            not comparable(tc, tn) for tc in complete for tn in incomplete
        )

    def part_key(p: Partition):
        return (n - len(p), tuple(sorted(tuple(sorted(b)) for b in p)))

    kept: set[Partition] = {p for p in seen if keep(p)}
    sink = canonical([frozenset(range(n))])
    kept.add(source)
    kept.add(sink)

    def level(p: Partition) -> int:
        return n - len(p)

    # Feeds fixpoint: every non-singleton column must have a strictly finer
    # kept producer holding both halves of some admissible split.
    while True:
        pair_best_level: dict[tuple[Block, Block], int] = {}
        for p in kept:
            for a, b in itertools.combinations(p, 2):
                if (a | b) in owner:
                    key = tuple(canonical([a, b]))
                    cur = pair_best_level.get(key)
                    if cur is None or level(p) < cur:
                        pair_best_level[key] = level(p)

        missing = []
        for p in sorted(kept, key=part_key):
            for blk in p:
                if len(blk) < 2:
                    continue
                fed = any(
                    pair_best_level.get(tuple(canonical([a, b])), 10**9) < level(p)
                    for a, b in splits(blk)
                )
                if not fed:
                    missing.append((p, blk))
        if not missing:
            break
        progressed = False
        for _, blk in missing:
            candidates = [
                canonical(
                    [a, b] + [frozenset({o}) for o in range(n) if o not in blk]
                )
                for a, b in splits(blk)
            ]
            best = min(candidates, key=part_key)
            if best not in seen:
                raise LatticeError(f"reinstated partition not reachable: {best}")
            if best not in kept:
                kept.add(best)
                progressed = True
        if not progressed:
            raise LatticeError("feed fixpoint made no progress")

    final = sorted(kept, key=part_key)
    index = {p: i for i, p in enumerate(final)}

    # canonical producer of each combinable column pair: finest kept stack
    # holding both blocks as columns
    producer: dict[tuple[Block, ...], Partition] = {}
    for p in final:
        for a, b in itertools.combinations(p, 2):
            if (a | b) in owner:
                key = tuple(canonical([a, b]))
                cur = producer.get(key)
                if cur is None or part_key(p) < part_key(cur):
                    producer[key] = p

    by_block: dict[Block, list[Partition]] = {}
    for p in final:
        for blk in p:
            by_block.setdefault(blk, []).append(p)

    plans: dict[Partition, list[tuple[int, int, Block, tuple[int, ...]]]] = {
        p: [] for p in final
    }
    for key, p in producer.items():
        a, b = key
        merged = a | b
        i, j = p.index(a), p.index(b)
        targets = tuple(
            index[q]
            for q in sorted(by_block.get(merged, []), key=part_key)
            if level(q) > level(p)
        )
        if targets:
            plans[p].append((min(i, j), max(i, j), merged, targets))

    singleton_routes = {
        o: tuple(index[q] for q in sorted(by_block.get(frozenset({o}), []), key=part_key))
        for o in range(n)
    }

    merge_edges: dict[Partition, tuple[Partition, ...]] = {}
    for p in final:
        outs = set()
        for a, b in itertools.combinations(p, 2):
            merged = a | b
            if merged in owner:
                q = canonical(
                    [blk for blk in p if blk is not a and blk is not b] + [merged]
                )
                if q in kept:
                    outs.add(q)
        merge_edges[p] = tuple(sorted(outs, key=part_key))

    stacks = tuple(
        StackSpec(
            stack_id=index[p],
            partition=p,
            level=level(p),
            merge_plan=tuple(sorted(plans[p])),
        )
        for p in final
    )

    return Lattice(
        occurrence_count=n,
        stacks=stacks,
        source_id=index[source],
        sink_id=index[sink],
        singleton_routes=singleton_routes,
        term_blocks=frozenset(occ_sets[1:]),
        admissible_blocks=frozenset(owner),
        merge_edges=merge_edges,
        largest_sublattice_size=max(bell(len(items)) for items in items_per_term),
    )


def merge_targets(lattice: Lattice, partition: Partition, block_a: Block, block_b: Block):
    """Merged partition if the union block is admissible, else None."""
    if block_a not in partition or block_b not in partition:
        raise ValueError("blocks to merge must belong to the partition")
    merged = block_a | block_b
    if merged not in lattice.admissible_blocks:
        return None
    return canonical(
        [b for b in partition if b != block_a and b != block_b] + [merged]
    )
