"""Streaming evaluation of cohesive queries over the lattice of stacks.

Keyword instances are merged into one preorder stream and pushed through
the lattice bottom-up. Each stack keeps one row per node of its current
root-to-node Dewey path; a row holds, per partition block (column), a small
set of partial-LCA entries.

An entry is (size, steps, at, sealed):

  size    minimal edge count connecting this row's node to instances
          covering the column's occurrences,
  steps   child branches of the node through which instances arrived
          (empty for instances sitting at the node itself),
  at      occurrence ids assigned to the node itself, needed to enforce
          keyword multiplicity when several occurrences share one node,
  sealed  True when the column completes a cohesive term whose instance
          LCA is exactly this node: the term's subtree is a black box, so
          the entry may climb but must not combine here.

Two entries combine when their step sets are disjoint (arrivals through
distinct branches connect edge-disjoint subtrees, so sizes add exactly)
and the node holds enough keyword occurrences for the merged at-set.

A slot keeps every non-dominated entry rather than the single smallest
size: the smallest entry can be unusable (overlapping arrival branch,
black-box seal) while a slightly larger one still yields a valid result,
so one-entry slots lose answers. Entries that climbed through a single
branch live in a per-step dict; combination stays exact while a column
draws on at most _COMB_STEPS distinct branches (deeper fanout only ever
costs precision of non-minimal candidates, never of the per-node minimum
on uniform corpora).
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass

from .ingest import InvertedIndex
from .lattice import Lattice, build_lattice
from .query import QueryAst
from .tree import Dewey

_COMB_STEPS = 8
_OTHERS_LIMIT = 64

_EMPTY = frozenset()


@dataclass(frozen=True, order=True)
class ResultEntry:
    size: int
    node: Dewey

    def __repr__(self):
        return f"ResultEntry({self.node}, size={self.size})"


@dataclass
class EvalStats:
    pushes: int = 0
    pops: int = 0
    partials: int = 0
    results: int = 0
    instances: int = 0
    stack_count: int = 0
    millis: float = 0.0
    note: str = ""


def rank(pairs) -> list[ResultEntry]:
    """Collapse duplicates to the minimal size, sort ascending, ties in preorder."""
    best: dict[Dewey, int] = {}
    for node, size in pairs:
        if node not in best or size < best[node]:
            best[node] = size
    return [
        ResultEntry(size=s, node=n)
        for n, s in sorted(best.items(), key=lambda kv: (kv[1], kv[0]))
    ]


class _Slot:
    """Non-dominated partial-LCA entries for one column at one node.

    singles: step -> best size for entries that climbed through that child
    branch alone (never sealed, no at-set). others: everything else, kept
    dominance-pruned. A single-branch entry can only be dominated by a
    better entry on the same branch, so the dict split is exact.
    """

    __slots__ = ("singles", "others")

    def __init__(self):
        self.singles: dict[int, int] = {}
        self.others: list = []

    def add(self, entry) -> None:
        size, steps, at, sealed = entry
        if not at and len(steps) == 1:
            # sealing requires two arrivals, so these are plain climbs
            step = next(iter(steps))
            cur = self.singles.get(step)
            if cur is None or size < cur:
                self.singles[step] = size
            return
        singles = self.singles
        for st in steps:
            cur = singles.get(st)
            if cur is not None and cur <= size:
                return  # a same-branch climb subsumes this entry
        for e in self.others:
            if (
                e[0] <= size
                and e[1] <= steps
                and e[2] <= at
                and (not e[3] or sealed)
            ):
                return
        self.others = [
            e
            for e in self.others
            if not (size <= e[0] and steps <= e[1] and at <= e[2] and (not sealed or e[3]))
        ]
        self.others.append(entry)
        if len(self.others) > _OTHERS_LIMIT:
            self.others.sort(key=lambda e: e[0])
            del self.others[_OTHERS_LIMIT:]

    def min_size(self) -> int:
        m = min(self.singles.values()) if self.singles else None
        for e in self.others:
            if m is None or e[0] < m:
                m = e[0]
        return m

    def candidates(self) -> list:
        """Entries offered to combination: all others plus the best singles."""
        singles = self.singles
        if len(singles) <= _COMB_STEPS:
            picked = singles.items()
        else:
            picked = sorted(singles.items(), key=lambda kv: kv[1])[:_COMB_STEPS]
        out = [(sz, frozenset((st,)), _EMPTY, False) for st, sz in picked]
        out.extend(self.others)
        return out

    def entries(self) -> list:
        out = [(sz, frozenset((st,)), _EMPTY, False) for st, sz in self.singles.items()]
        out.extend(self.others)
        return out


class _RuntimeStack:
    __slots__ = ("spec", "ncols", "col_index", "path", "rows")

    def __init__(self, spec):
        self.spec = spec
        self.ncols = len(spec.partition)
        self.col_index = {blk: i for i, blk in enumerate(spec.partition)}
        self.path: list[int] = []
        self.rows: list[list] = []  # len(rows) == len(path) + 1 while open


class CohesiveEvaluation:
    """One query execution; owns all lattice-stack state exclusively."""

    def __init__(self, lattice: Lattice, kw_of: list[str]):
        self.lattice = lattice
        self.kw_of = kw_of
        self.stacks = [_RuntimeStack(s) for s in lattice.stacks]
        self.by_level: list[list[int]] = [[] for _ in range(lattice.max_level + 1)]
        for s in lattice.stacks:
            self.by_level[s.level].append(s.stack_id)
        self.results: list[tuple[Dewey, int]] = []
        self.node_counts: dict[Dewey, dict[str, int]] = {}
        self.stats = EvalStats(stack_count=lattice.stack_count)
        self._partials: list[list] = [[] for _ in self.stacks]
        self._instances: list[list] = [[] for _ in self.stacks]

    # ---- stack primitives -------------------------------------------------

    def push(self, stack: _RuntimeStack, node: Dewey, block, entry) -> None:
        """Install a partial LCA into the stack row for `node`."""
        self.stats.pushes += 1
        self._sync(stack, node)
        path, rows = stack.path, stack.rows
        while len(path) < len(node):
            path.append(node[len(path)])
            rows.append([None] * stack.ncols)
        col = stack.col_index[block]
        row = rows[-1]
        slot = row[col]
        if slot is None:
            slot = row[col] = _Slot()
        slot.add(entry)

    def _sync(self, stack: _RuntimeStack, node: Dewey) -> None:
        """Pop rows that are not ancestors of `node` (path becomes a prefix)."""
        if not stack.rows:
            stack.rows.append([None] * stack.ncols)
        path = stack.path
        while tuple(path) != node[: len(path)]:
            self.pop(stack)
            path = stack.path

    def pop(self, stack: _RuntimeStack) -> None:
        """Pop the top row: emit combinations and results, update the parent."""
        self.stats.pops += 1
        node = tuple(stack.path)
        row = stack.rows.pop()

        if stack.ncols == 1:
            slot = row[0]
            if slot is not None:
                for e in slot.entries():
                    self.results.append((node, e[0]))
                    self.stats.results += 1
        else:
            counts = self.node_counts.get(node)
            partials = self._partials
            for i, j, block, targets in stack.spec.merge_plan:
                slot_a, slot_b = row[i], row[j]
                if slot_a is None or slot_b is None:
                    continue
                made = self._combine(slot_a, slot_b, block, counts)
                for entry in made:
                    self.stats.partials += 1
                    for tid in targets:
                        partials[tid].append((node, block, entry))
            if stack.rows:
                parent_row = stack.rows[-1]
                step = node[-1]
                for col in range(stack.ncols):
                    slot = row[col]
                    if slot is None:
                        continue
                    m = slot.min_size() + 1
                    pslot = parent_row[col]
                    if pslot is None:
                        pslot = parent_row[col] = _Slot()
                    cur = pslot.singles.get(step)
                    if cur is None or m < cur:
                        pslot.singles[step] = m

        if stack.path:
            stack.path.pop()

    def _combine(self, slot_a: _Slot, slot_b: _Slot, block, counts):
        kw_of = self.kw_of
        completes_term = block in self.lattice.term_blocks
        out: list = []
        for ea in slot_a.candidates():
            if ea[3]:
                continue
            sa, steps_a, at_a = ea[0], ea[1], ea[2]
            for eb in slot_b.candidates():
                if eb[3]:
                    continue
                if steps_a & eb[1]:
                    continue
                at = at_a | eb[2]
                if at_a and eb[2]:
                    need = Counter(kw_of[o] for o in at)
                    if counts is None or any(
                        counts.get(kw, 0) < c for kw, c in need.items()
                    ):
                        continue
                steps = steps_a | eb[1]
                sealed = completes_term and (len(steps) + (1 if at else 0)) >= 2
                candidate = (sa + eb[0], steps, at, sealed)
                dominated = False
                for e in out:
                    if e[0] <= candidate[0] and e[1] <= steps and e[2] <= at and (not e[3] or sealed):
                        dominated = True
                        break
                if not dominated:
                    out = [
                        e
                        for e in out
                        if not (
                            candidate[0] <= e[0]
                            and steps <= e[1]
                            and at <= e[2]
                            and (not sealed or e[3])
                        )
                    ]
                    out.append(candidate)
        return out

    # ---- streaming driver -------------------------------------------------

    def feed(self, node: Dewey, occ_hits: list[tuple[int, int]]) -> None:
        """Process one instance node; occ_hits holds (occurrence id, count)."""
        self.stats.instances += 1
        kw_counts: dict[str, int] = {}
        for occ, count in occ_hits:
            kw_counts[self.kw_of[occ]] = count
        self.node_counts[node] = kw_counts

        routes = self.lattice.singleton_routes
        for occ, _count in occ_hits:
            entry = (0, _EMPTY, frozenset({occ}), False)
            block = frozenset({occ})
            for sid in routes[occ]:
                self._instances[sid].append((node, block, entry))

        # Every stack advances in lockstep: apply buffered partials (all on
        # the previous root-to-node chain, deepest first), retire rows the
        # stream has left behind, then admit the new instance. Skipping the
        # sync would let partials reach a stack after it popped that region.
        for level_ids in self.by_level:
            for sid in level_ids:
                self._apply_partials(sid)
                stack = self.stacks[sid]
                if stack.rows:
                    self._sync(stack, node)
                self._apply_instances(sid)

    def flush(self) -> None:
        """Drain remaining rows, letting later levels process new partials."""
        for level_ids in self.by_level:
            for sid in level_ids:
                self._apply_partials(sid)
                stack = self.stacks[sid]
                while stack.rows:
                    self.pop(stack)

    def _apply_partials(self, sid: int) -> None:
        partials = self._partials[sid]
        if partials:
            # deepest first: rows settle before their ancestors pop
            partials.sort(key=lambda app: app[0], reverse=True)
            stack = self.stacks[sid]
            for node, block, entry in partials:
                self.push(stack, node, block, entry)
            self._partials[sid] = []

    def _apply_instances(self, sid: int) -> None:
        instances = self._instances[sid]
        if instances:
            stack = self.stacks[sid]
            for node, block, entry in instances:
                self.push(stack, node, block, entry)
            self._instances[sid] = []


def _merged_stream(ast: QueryAst, idx: InvertedIndex, caps: dict[str, int] | None = None):
    """Preorder stream of (node, [(occ id, count)]) over all query keywords."""
    occs_of_kw: dict[str, list[int]] = {}
    for occ in ast.occurrences:
        occs_of_kw.setdefault(occ.keyword, []).append(occ.occ_id)
    per_node: dict[Dewey, list[tuple[int, int]]] = {}
    for kw, occ_ids in occs_of_kw.items():
        plist = idx.instances(kw)
        if caps and kw in caps:
            plist = plist[: caps[kw]]
        for dewey, count in plist:
            hits = per_node.setdefault(dewey, [])
            for occ in occ_ids:
                hits.append((occ, count))
    return sorted(per_node.items())


def evaluate_with_stats(
    ast: QueryAst, idx: InvertedIndex, caps: dict[str, int] | None = None
) -> tuple[list[ResultEntry], EvalStats]:
    """Run the lattice evaluation; results ranked ascending by LCA size."""
    t0 = time.perf_counter()
    missing = sorted(
        {o.keyword for o in ast.occurrences if not idx.instances(o.keyword)}
    )
    if missing:
        stats = EvalStats(note="unknown keywords: " + ", ".join(missing))
        stats.millis = (time.perf_counter() - t0) * 1000
        return [], stats

    lattice = build_lattice(ast)
    kw_of = [o.keyword for o in ast.occurrences]
    ev = CohesiveEvaluation(lattice, kw_of)
    for node, hits in _merged_stream(ast, idx, caps):
        ev.feed(node, hits)
    ev.flush()
    ranked = rank(ev.results)
    ev.stats.millis = (time.perf_counter() - t0) * 1000
    return ranked, ev.stats


def evaluate(ast: QueryAst, idx: InvertedIndex) -> list[ResultEntry]:
    results, _ = evaluate_with_stats(ast, idx)
    return results
