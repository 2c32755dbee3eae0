"""Command-line surface: index, query (with REPL), oracle, bench, eval.

Exit codes: 0 success, 1 runtime failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import os
import random
import sys
from pathlib import Path

from . import baselines, engine, metrics
from .ingest import (
    DocumentParseError,
    IndexFormatError,
    build_index,
    load_index,
    parse_document,
    save_index,
)
from .lattice import build_lattice
from .query import QuerySyntaxError, parse_query, query_stats
from .synth import instantiate_pattern, pattern_slots, uniform_record_tree, zipf_tree
from .tree import format_dewey, parse_dewey

CACHE_ENV = "COHESEARCH_INDEX_CACHE"


class CliError(RuntimeError):
    def __init__(self, message: str, code: int = 1):
        super().__init__(message)
        self.code = code


def _load_or_build_index(path: str):
    """Accept an index file or an XML file; XML goes through the cache dir."""
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such file: {path}")
    with p.open("rb") as fh:
        head = fh.read(8)
    if head == b"CHSQIDX\x01":
        return load_index(p)
    cache_dir = os.environ.get(CACHE_ENV)
    if cache_dir:
        digest = hashlib.sha256(p.read_bytes()).hexdigest()[:16]
        cached = Path(cache_dir) / f"{p.stem}-{digest}.idx"
        if cached.exists():
            return load_index(cached)
    tree = parse_document(p.read_text())
    idx = build_index(tree)
    if cache_dir:
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        save_index(idx, cached)
    return idx


def cmd_index(args) -> int:
    xml = Path(args.xml)
    if not xml.exists():
        raise CliError(f"no such file: {args.xml}")
    tree = parse_document(xml.read_text())
    idx = build_index(tree)
    save_index(idx, args.out)
    print(f"indexed {args.xml}: nodes={idx.node_count} keywords={len(idx.postings)} depth={idx.doc_depth}")
    return 0


def _run_one_query(idx, text: str, args) -> None:
    ast = parse_query(text)
    semantics = args.semantics
    if semantics == "cohesive":
        results, stats = engine.evaluate_with_stats(ast, idx)
        if stats.note:
            print(f"note: {stats.note}; empty result", file=sys.stderr)
        if args.top_size:
            results = metrics.top_size_filter(results)
        if args.limit is not None:
            results = results[: args.limit]
        for r in results:
            path = idx.label_path(r.node)
            if args.tsv:
                print(f"{format_dewey(r.node)}\t{r.size}\t{path}")
            else:
                value = idx.value_of(r.node)
                snippet = f"  [{value[:60]}]" if value else ""
                print(f"{format_dewey(r.node)}  size={r.size}  {path}{snippet}")
    else:
        keywords = {o.keyword for o in ast.occurrences}
        fn = baselines.slca if semantics == "slca" else baselines.elca
        nodes = sorted(fn(keywords, idx))
        if args.limit is not None:
            nodes = nodes[: args.limit]
        for d in nodes:
            if args.tsv:
                print(f"{format_dewey(d)}\t-\t{idx.label_path(d)}")
            else:
                print(f"{format_dewey(d)}  {idx.label_path(d)}")


def cmd_query(args) -> int:
    idx = _load_or_build_index(args.index)
    if args.query is not None:
        _run_one_query(idx, args.query, args)
        return 0
    # REPL
    while True:
        try:
            line = input("query> ")
        except EOFError:
            print()
            return 0
        line = line.strip()
        if not line:
            return 0
        try:
            _run_one_query(idx, line, args)
        except QuerySyntaxError as exc:
            print(f"syntax error: {exc}", file=sys.stderr)


def cmd_oracle(args) -> int:
    xml = Path(args.xml)
    if not xml.exists():
        raise CliError(f"no such file: {args.xml}")
    tree = parse_document(xml.read_text())
    idx = build_index(tree)
    ast = parse_query(args.query)
    got = {(r.node, r.size) for r in engine.evaluate(ast, idx)}
    want = baselines.oracle_answer(tree=tree, ast=ast, guard=args.guard)
    if got == want:
        print(f"MATCH: {len(got)} results")
        for node, size in sorted(want, key=lambda p: (p[1], p[0])):
            print(f"  {format_dewey(node)}  size={size}")
        return 0
    print("MISMATCH")
    print("  engine-only:", sorted(got - want))
    print("  oracle-only:", sorted(want - got))
    raise CliError("engine disagrees with brute-force oracle")


def _parse_caps(spec: str) -> list[int]:
    if ":" in spec:
        lo, hi, step = (int(x) for x in spec.split(":"))
        return list(range(lo, hi + 1, step))
    return [int(x) for x in spec.split(",")]


def bench_rows(args) -> list[list]:
    """Benchmark rows: one per (pattern, cap), timings averaged over reps."""
    rows = []
    shared_idx = _load_or_build_index(args.index) if args.index else None
    for pattern in args.patterns:
        slots = pattern_slots(pattern)
        if shared_idx is not None:
            idx = shared_idx
            ranked = sorted(idx.postings, key=lambda kw: (-len(idx.postings[kw]), kw))
            if len(ranked) < slots:
                raise CliError(f"pattern needs {slots} keywords, index has {len(ranked)}")
            keywords = ranked[:slots]
        elif args.synthetic == "uniform":
            keywords = [f"kw{i}" for i in range(slots)]
            idx = build_index(uniform_record_tree(records=max(args.caps), keywords=keywords))
        else:
            idx = build_index(zipf_tree(random.Random(args.seed), n_nodes=args.synthetic_nodes))
            ranked = sorted(idx.postings, key=lambda kw: (-len(idx.postings[kw]), kw))
            if len(ranked) < slots:
                raise CliError(f"pattern needs {slots} keywords, corpus has {len(ranked)}")
            keywords = ranked[:slots]

        ast = parse_query(instantiate_pattern(pattern, keywords))
        k, t, c, _n = query_stats(ast)
        for cap in args.caps:
            caps = {kw: cap for kw in keywords}
            stats_list = []
            for rep in range(args.reps + 1):  # first run warms up and is dropped
                _results, stats = engine.evaluate_with_stats(ast, idx, caps=caps)
                if rep > 0:
                    stats_list.append(stats)
            millis = sum(s.millis for s in stats_list) / len(stats_list)
            total_instances = sum(
                min(cap, len(idx.postings.get(kw, []))) for kw in set(keywords)
            )
            rows.append(
                [
                    pattern,
                    k,
                    t,
                    c,
                    total_instances,
                    f"{millis:.3f}",
                    stats_list[0].stack_count,
                    stats_list[0].pushes,
                ]
            )
    return rows


def cmd_bench(args) -> int:
    args.caps = _parse_caps(args.caps)
    if not args.caps or sorted(args.caps) != args.caps:
        raise CliError("caps must be increasing", code=2)
    writer = csv.writer(sys.stdout)
    writer.writerow(
        ["pattern", "k", "t", "c", "instances", "millis", "stackCount", "pushCount"]
    )
    writer.writerows(bench_rows(args))
    return 0


def cmd_eval(args) -> int:
    idx = _load_or_build_index(args.index)
    queries: dict[str, str] = {}
    for line in Path(args.queries).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        qid, _, text = line.partition("\t")
        if not text:
            raise CliError(f"bad query line (want 'id<TAB>query'): {line!r}", code=2)
        queries[qid] = text

    relevant: dict[str, set] = {}
    for line in Path(args.relevance).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        qid, _, nodes = line.partition("\t")
        if qid not in queries:
            raise CliError(f"unknown query id in relevance file: {qid!r}")
        relevant[qid] = {
            parse_dewey(tok) for tok in nodes.replace(",", " ").split() if tok
        }

    writer = csv.writer(sys.stdout)
    writer.writerow(["semantics", "query", "P", "R", "F", "retrieved", "relevant"])
    for qid, text in queries.items():
        ast = parse_query(text)
        rel = relevant.get(qid, set())
        cohesive = {
            r.node for r in metrics.top_size_filter(engine.evaluate(ast, idx))
        }
        keywords = {o.keyword for o in ast.occurrences}
        rows = [
            ("cohesive-top-size", cohesive),
            ("slca", baselines.slca(keywords, idx)),
            ("elca", baselines.elca(keywords, idx)),
        ]
        for name, retrieved in rows:
            rep = metrics.evaluate_effectiveness(retrieved, rel)
            writer.writerow(
                [
                    name,
                    qid,
                    f"{float(rep.precision):.4f}",
                    f"{float(rep.recall):.4f}",
                    f"{float(rep.fmeasure):.4f}",
                    rep.retrieved_count,
                    rep.relevant_count,
                ]
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cohesearch",
        description="Keyword search on XML trees with cohesive term grouping",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build an index file from an XML document")
    p.add_argument("xml")
    p.add_argument("out")
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("query", help="evaluate a query (REPL when omitted)")
    p.add_argument("index", help="index file or XML document")
    p.add_argument("query", nargs="?")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--top-size", action="store_true")
    p.add_argument(
        "--semantics", choices=["cohesive", "slca", "elca"], default="cohesive"
    )
    p.add_argument("--tsv", action="store_true")
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("oracle", help="compare the engine against brute force")
    p.add_argument("xml")
    p.add_argument("query")
    p.add_argument("--guard", type=int, default=10_000_000)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("bench", help="scaling benchmark over query patterns")
    p.add_argument("--index", default=None, help="index or XML file (default: synthetic)")
    p.add_argument(
        "--synthetic", choices=["uniform", "zipf"], default="uniform",
        help="synthetic corpus when no index is given",
    )
    p.add_argument("--synthetic-nodes", type=int, default=20000)
    p.add_argument("--patterns", nargs="+", default=["(xx((xxxx)(xxxx)))"])
    p.add_argument("--caps", default="100:1000:100", help="lo:hi:step or comma list")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("eval", help="effectiveness comparison against judgments")
    p.add_argument("index")
    p.add_argument("queries", help="lines: id<TAB>query")
    p.add_argument("relevance", help="lines: id<TAB>dewey[, dewey...]")
    p.set_defaults(fn=cmd_eval)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (QuerySyntaxError, DocumentParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (IndexFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
