"""Cohesive keyword query parsing.

Grammar:

    Q -> (k) | T
    T -> (S S)
    S -> S S | T | k

A term groups at least two keywords and/or terms and declares them an
indivisible unit. Keyword occurrences are distinct AST items even when the
same keyword repeats, so downstream partition logic can tell them apart.
As a convenience, a bare top-level list without outer parentheses is
accepted as sugar for one outer term.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercased maximal runs of ASCII letters/digits; everything else separates."""
    return _TOKEN.findall(text.lower())


class QuerySyntaxError(ValueError):
    """Raised when a query string does not conform to the grammar."""


@dataclass(frozen=True)
class KeywordOccurrence:
    keyword: str
    occ_id: int


@dataclass
class Term:
    children: list[Union["Term", KeywordOccurrence]] = field(default_factory=list)
    term_id: int = 0
    nesting_depth: int = 0

    @property
    def cardinality(self) -> int:
        return len(self.children)


@dataclass
class QueryAst:
    root: Term
    occurrences: list[KeywordOccurrence]

    @property
    def single_keyword(self) -> bool:
        """True for the special one-keyword form '(k)'."""
        return len(self.occurrences) == 1 and not any(
            isinstance(c, Term) for c in self.root.children
        )

    def terms(self) -> list[Term]:
        """All terms in preorder, the root first."""
        out: list[Term] = []
        stack = [self.root]
        while stack:
            t = stack.pop()
            out.append(t)
            for c in reversed(t.children):
                if isinstance(c, Term):
                    stack.append(c)
        out.sort(key=lambda t: t.term_id)
        return out

    def occ_set(self, term: Term) -> frozenset[int]:
        """Occurrence ids covered by a term, nested terms included."""
        ids: list[int] = []
        stack: list[Union[Term, KeywordOccurrence]] = [term]
        while stack:
            item = stack.pop()
            if isinstance(item, KeywordOccurrence):
                ids.append(item.occ_id)
            else:
                stack.extend(item.children)
        return frozenset(ids)

    def structure_signature(self):
        """Keyword-free shape of the AST; identical shapes share a lattice."""

        def sig(item):
            if isinstance(item, KeywordOccurrence):
                return item.occ_id
            return tuple(sig(c) for c in item.children)

        return sig(self.root)


def _scan(text: str) -> list[str]:
    tokens: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append(ch)
            i += 1
        else:
            m = re.match(r"[A-Za-z0-9]+", text[i:])
            if not m:
                raise QuerySyntaxError(
                    f"unexpected character {ch!r} at position {i}; "
                    "keywords match [A-Za-z0-9]+ (production S -> k)"
                )
            tokens.append(m.group(0).lower())
            i += len(m.group(0))
    return tokens


class _Parser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0
        self.occurrences: list[KeywordOccurrence] = []
        self.term_count = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def keyword(self, text: str) -> KeywordOccurrence:
        occ = KeywordOccurrence(text, len(self.occurrences))
        self.occurrences.append(occ)
        return occ

    def group(self, depth: int) -> Term:
        # caller consumed '('
        term = Term(term_id=self.term_count, nesting_depth=depth)
        self.term_count += 1
        while True:
            tok = self.peek()
            if tok is None:
                raise QuerySyntaxError("unbalanced parentheses: missing ')' (production T -> (S S))")
            if tok == ")":
                self.take()
                break
            if tok == "(":
                self.take()
                term.children.append(self.group(depth + 1))
            else:
                term.children.append(self.keyword(self.take()))
        if not term.children:
            raise QuerySyntaxError("empty term '()' (a term is a multiset of at least two items)")
        if len(term.children) == 1:
            only = term.children[0]
            if isinstance(only, Term) or depth > 0:
                raise QuerySyntaxError(
                    "a parenthesized group needs at least two items; "
                    "a single child is only allowed for the root form Q -> (k)"
                )
        return term


def parse_query(text: str) -> QueryAst:
    """Parse a cohesive keyword query string into an AST."""
    tokens = _scan(text)
    if not tokens:
        raise QuerySyntaxError("empty query")
    if tokens[0] != "(":
        # bare-list sugar: treat the whole input as one outer term
        tokens = ["("] + tokens + [")"]
    parser = _Parser(tokens)
    if parser.take() != "(":
        raise QuerySyntaxError("query must start with '(' (productions Q -> (k) | T)")
    root = parser.group(0)
    if parser.peek() is not None:
        raise QuerySyntaxError(f"trailing input after query: {parser.peek()!r}")
    return QueryAst(root=root, occurrences=parser.occurrences)


def render(ast: QueryAst) -> str:
    """Canonical single-space, fully parenthesized form; parse(render(x)) == x."""

    def fmt(item) -> str:
        if isinstance(item, KeywordOccurrence):
            return item.keyword
        return "(" + " ".join(fmt(c) for c in item.children) + ")"

    return fmt(ast.root)


def query_stats(ast: QueryAst) -> tuple[int, int, int, int]:
    """(k, t, c, n): keyword count, proper term count, max cardinality, max nesting depth."""
    terms = ast.terms()
    k = len(ast.occurrences)
    t = len(terms) - 1
    c = max(term.cardinality for term in terms)
    n = max(term.nesting_depth for term in terms)
    return k, t, c, n
