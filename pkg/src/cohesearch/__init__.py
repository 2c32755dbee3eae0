"""Keyword search on tree data with cohesive term grouping and LCA-size ranking."""

from .baselines import elca, enumerate_embeddings, oracle_answer, slca
from .engine import ResultEntry, evaluate, evaluate_with_stats, rank
from .ingest import (
    InvertedIndex,
    build_index,
    load_index,
    parse_document,
    save_index,
    tokenize,
)
from .lattice import Lattice, bell, build_lattice, construct_control_sets, merge_targets
from .metrics import EvalReport, evaluate_effectiveness, top_size_filter
from .query import QueryAst, QuerySyntaxError, parse_query, query_stats, render
from .tree import DataTree, Node, format_dewey, is_ancestor_or_self, lca, mct_size

__version__ = "0.1.0"

__all__ = [
    "DataTree",
    "EvalReport",
    "InvertedIndex",
    "Lattice",
    "Node",
    "QueryAst",
    "QuerySyntaxError",
    "ResultEntry",
    "bell",
    "build_index",
    "build_lattice",
    "construct_control_sets",
    "elca",
    "enumerate_embeddings",
    "evaluate",
    "evaluate_effectiveness",
    "evaluate_with_stats",
    "format_dewey",
    "is_ancestor_or_self",
    "lca",
    "load_index",
    "mct_size",
    "merge_targets",
    "oracle_answer",
    "parse_document",
    "parse_query",
    "query_stats",
    "rank",
    "render",
    "save_index",
    "slca",
    "tokenize",
    "top_size_filter",
]
