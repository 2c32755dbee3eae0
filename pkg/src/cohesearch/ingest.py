"""XML ingestion: parse documents, extract keywords, build and persist the index.

Attributes become child nodes placed before any element children, so Dewey
codes are deterministic. Matching is case-insensitive: both corpus text and
queries go through the same tokenizer. Namespace prefixes are kept verbatim
in labels (no namespace semantics).
"""

from __future__ import annotations

import hashlib
import struct
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from xml.parsers import expat

from .tree import DataTree, Dewey, Node

from .query import tokenize  # single source of truth for corpus and query tokens

__all__ = [
    "tokenize",
    "parse_document",
    "build_index",
    "save_index",
    "load_index",
    "InvertedIndex",
    "DocumentParseError",
    "IndexFormatError",
]


class DocumentParseError(ValueError):
    """Malformed XML input, with line/column in the message."""


class IndexFormatError(ValueError):
    """Unreadable, corrupted, or version-incompatible index file."""


def parse_document(xml_text: str) -> DataTree:
    """Parse an XML document into a DataTree.

    One node per element and per attribute. Attribute nodes precede element
    children; an element's value is its own text content (segments between
    child elements joined by single spaces); comments and PIs are ignored.
    """
    records: list[list] = []  # [dewey, label, value_or_parts]
    stack: list[list] = []  # [dewey, child_count, text_parts, record]

    parser = expat.ParserCreate()
    parser.ordered_attributes = True
    parser.buffer_text = True

    def start(name, attrs):
        if stack:
            parent = stack[-1]
            dewey = parent[0] + (parent[1],)
            parent[1] += 1
        else:
            dewey = ()
        record = [dewey, name, None]
        records.append(record)
        nattrs = len(attrs) // 2
        for i in range(nattrs):
            records.append([dewey + (i,), attrs[2 * i], attrs[2 * i + 1]])
        stack.append([dewey, nattrs, [], record])

    def chars(data):
        if stack:
            stack[-1][2].append(data)

    def end(name):
        entry = stack.pop()
        segments = [s.strip() for s in entry[2]]
        text = " ".join(s for s in segments if s)
        entry[3][2] = text or None

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars

    try:
        parser.Parse(xml_text, True)
    except expat.ExpatError as exc:
        raise DocumentParseError(
            f"XML parse error at line {exc.lineno}, column {exc.offset + 1}: "
            f"{expat.errors.messages[exc.code]}"
        ) from None

    return DataTree(nodes=[Node(d, label, value) for d, label, value in records])


@dataclass
class InvertedIndex:
    """Keyword postings plus the node table of the source document.

    postings maps keyword -> preorder-sorted [(dewey, count)] where count is
    how many times the keyword occurs in that node's label and value
    together. The node table keeps (dewey, label, value) for result display.
    """

    postings: dict[str, list[tuple[Dewey, int]]] = field(default_factory=dict)
    nodes: list[tuple[Dewey, str, str | None]] = field(default_factory=list)
    doc_depth: int = 0

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def keywords(self) -> list[str]:
        return sorted(self.postings)

    def instances(self, keyword: str) -> list[tuple[Dewey, int]]:
        return self.postings.get(keyword, [])

    def label_path(self, dewey: Dewey) -> str:
        by_dewey = getattr(self, "_by_dewey", None)
        if by_dewey is None:
            by_dewey = {d: (label, value) for d, label, value in self.nodes}
            self._by_dewey = by_dewey
        labels = [by_dewey[dewey[:k]][0] for k in range(len(dewey) + 1)]
        return "/".join(labels)

    def value_of(self, dewey: Dewey) -> str | None:
        self.label_path(dewey[:0])  # ensure cache
        return self._by_dewey[dewey][1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, InvertedIndex):
            return NotImplemented
        return (
            self.postings == other.postings
            and self.nodes == other.nodes
            and self.doc_depth == other.doc_depth
        )


def build_index(tree: DataTree) -> InvertedIndex:
    """Index every node under the tokens of its label and value."""
    postings: dict[str, list[tuple[Dewey, int]]] = {}
    for node in tree.nodes:
        counts = Counter(tokenize(node.label))
        if node.value:
            counts.update(tokenize(node.value))
        for kw in sorted(counts):
            postings.setdefault(kw, []).append((node.dewey, counts[kw]))
    return InvertedIndex(
        postings={kw: postings[kw] for kw in sorted(postings)},
        nodes=[(n.dewey, n.label, n.value) for n in tree.nodes],
        doc_depth=tree.depth,
    )


_MAGIC = b"CHSQIDX\x01"
_VERSION = 1


def _pack_str(out: list[bytes], s: str):
    data = s.encode("utf-8")
    out.append(struct.pack("<I", len(data)))
    out.append(data)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise IndexFormatError("truncated index file")
        values = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return values

    def take_str(self) -> str:
        (n,) = self.take("<I")
        if self.pos + n > len(self.data):
            raise IndexFormatError("truncated index file")
        s = self.data[self.pos : self.pos + n].decode("utf-8")
        self.pos += n
        return s


def save_index(idx: InvertedIndex, path) -> None:
    """Write the versioned binary container; layout documented in the README."""
    out: list[bytes] = [_MAGIC, struct.pack("<HIH", _VERSION, idx.node_count, idx.doc_depth)]

    pool: dict[str, int] = {}

    def intern(s: str) -> int:
        if s not in pool:
            pool[s] = len(pool)
        return pool[s]

    node_records = []
    ordinals: dict[Dewey, int] = {}
    for i, (dewey, label, value) in enumerate(idx.nodes):
        ordinals[dewey] = i
        vid = 0xFFFFFFFF if value is None else intern(value)
        node_records.append((dewey, intern(label), vid))

    # node table
    for dewey, label_id, value_id in node_records:
        out.append(struct.pack("<H", len(dewey)))
        out.append(struct.pack(f"<{len(dewey)}I", *dewey) if dewey else b"")
        out.append(struct.pack("<II", label_id, value_id))

    # string pool (ids are first-use order, which is deterministic)
    strings = sorted(pool, key=pool.get)
    out.append(struct.pack("<I", len(strings)))
    for s in strings:
        _pack_str(out, s)

    # postings, keyword-sorted
    out.append(struct.pack("<I", len(idx.postings)))
    for kw in sorted(idx.postings):
        _pack_str(out, kw)
        plist = idx.postings[kw]
        out.append(struct.pack("<I", len(plist)))
        for dewey, count in plist:
            out.append(struct.pack("<IH", ordinals[dewey], count))

    body = b"".join(out)
    Path(path).write_bytes(body + hashlib.sha256(body).digest())


def load_index(path) -> InvertedIndex:
    raw = Path(path).read_bytes()
    if len(raw) < len(_MAGIC) + 32:
        raise IndexFormatError("truncated index file")
    body, digest = raw[:-32], raw[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise IndexFormatError("checksum mismatch: index file is corrupted")
    if body[: len(_MAGIC)] != _MAGIC:
        raise IndexFormatError("not an index file (bad magic)")

    r = _Reader(body)
    r.pos = len(_MAGIC)
    version, node_count, doc_depth = r.take("<HIH")
    if version != _VERSION:
        raise IndexFormatError(f"unsupported index version {version}")

    node_refs = []
    for _ in range(node_count):
        (dlen,) = r.take("<H")
        dewey = r.take(f"<{dlen}I") if dlen else ()
        label_id, value_id = r.take("<II")
        node_refs.append((dewey, label_id, value_id))

    (nstrings,) = r.take("<I")
    strings = [r.take_str() for _ in range(nstrings)]

    def string(sid: int) -> str | None:
        if sid == 0xFFFFFFFF:
            return None
        if sid >= len(strings):
            raise IndexFormatError("dangling string reference")
        return strings[sid]

    nodes = [(dewey, string(lid), string(vid)) for dewey, lid, vid in node_refs]

    postings: dict[str, list[tuple[Dewey, int]]] = {}
    (nkw,) = r.take("<I")
    for _ in range(nkw):
        kw = r.take_str()
        (plen,) = r.take("<I")
        plist = []
        for _ in range(plen):
            ordinal, count = r.take("<IH")
            if ordinal >= len(nodes):
                raise IndexFormatError("dangling node reference in postings")
            plist.append((nodes[ordinal][0], count))
        postings[kw] = plist

    if r.pos != len(body):
        raise IndexFormatError("trailing bytes in index file")

    return InvertedIndex(postings=postings, nodes=nodes, doc_depth=doc_depth)
