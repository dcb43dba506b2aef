"""Integer-indexed knowledge graphs, term dictionaries and N-Triples ingestion."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, TextIO

import numpy as np

from kgmotive.errors import ContractViolation, KGMotiveError, NTriplesError

Triple = tuple[int, int, int]

# IRI, blank node, or literal with an optional language tag / datatype suffix
_TERM = re.compile(
    r'<[^>]*>'
    r'|_:[^\s.]+(?:\.[^\s.]+)*'
    r'|"(?:[^"\\]|\\.)*"(?:@[A-Za-z]+(?:-[A-Za-z0-9]+)*|\^\^<[^>]*>)?'
)


@dataclass(frozen=True)
class DegreeSequence:
    """In-degree per node, occurrence count per relation, out-degree per node."""

    d_in: np.ndarray
    d_rel: np.ndarray
    d_out: np.ndarray

    @property
    def m(self) -> int:
        return int(self.d_rel.sum())

    def is_consistent(self) -> bool:
        return int(self.d_in.sum()) == int(self.d_out.sum()) == int(self.d_rel.sum())


class KnowledgeGraph:
    """A directed, relation-labeled multigraph ``(v, r, edges)``.

    Nodes are ``0..v-1`` and relations ``0..r-1``. The graph is immutable;
    adjacency indexes are built once at construction so that the matcher can
    look up neighbourhoods without scanning the edge set.
    """

    def __init__(self, v: int, r: int, edges: Iterable[Triple] = ()):
        if v < 0 or r < 0:
            raise ContractViolation("graph dimensions must be nonnegative")
        self.v = int(v)
        self.r = int(r)
        edge_set = frozenset((int(s), int(p), int(o)) for s, p, o in edges)
        for s, p, o in edge_set:
            if not (0 <= s < v and 0 <= o < v and 0 <= p < r):
                raise ContractViolation(f"triple {(s, p, o)} out of range for v={v}, r={r}")
        self.edges = edge_set
        self.edge_list: tuple[Triple, ...] = tuple(sorted(edge_set))
        self._build_indexes()

    def _build_indexes(self):
        out = [[] for _ in range(self.v)]
        inc = [[] for _ in range(self.v)]
        by_rel = [[] for _ in range(self.r)]
        sp: dict[tuple[int, int], list[int]] = {}
        po: dict[tuple[int, int], list[int]] = {}
        so: dict[tuple[int, int], list[int]] = {}
        # edge_list is sorted by (s, p, o), so every list below comes out sorted
        for s, p, o in self.edge_list:
            out[s].append((p, o))
            by_rel[p].append((s, o))
            sp.setdefault((s, p), []).append(o)
            so.setdefault((s, o), []).append(p)
        for s, p, o in sorted(self.edge_list, key=lambda t: (t[2], t[0], t[1])):
            inc[o].append((s, p))
            po.setdefault((p, o), []).append(s)
        self.out = [tuple(x) for x in out]
        self.inc = [tuple(x) for x in inc]
        self.by_rel = [tuple(x) for x in by_rel]
        self.sp_index = {k: tuple(x) for k, x in sp.items()}
        self.po_index = {k: tuple(x) for k, x in po.items()}
        self.so_index = {k: tuple(x) for k, x in so.items()}

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> DegreeSequence:
        return degree_sequence(self)

    def __contains__(self, triple) -> bool:
        return tuple(triple) in self.edges

    def __eq__(self, other):
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return (self.v, self.r, self.edges) == (other.v, other.r, other.edges)

    def __hash__(self):
        return hash((self.v, self.r, self.edges))

    def __repr__(self):
        return f"KnowledgeGraph(v={self.v}, r={self.r}, m={self.m})"


def degree_sequence(G: KnowledgeGraph) -> DegreeSequence:
    if G.m == 0:
        return DegreeSequence(
            np.zeros(G.v, dtype=np.int64),
            np.zeros(G.r, dtype=np.int64),
            np.zeros(G.v, dtype=np.int64),
        )
    arr = np.array(G.edge_list, dtype=np.int64)
    return DegreeSequence(
        np.bincount(arr[:, 2], minlength=G.v),
        np.bincount(arr[:, 1], minlength=G.r),
        np.bincount(arr[:, 0], minlength=G.v),
    )


def remove_triples(G: KnowledgeGraph, drop) -> KnowledgeGraph:
    """Template graph: ``G`` without the triples in ``drop``; dimensions are kept."""
    drop = {tuple(t) for t in drop}
    missing = drop - G.edges
    if missing:
        raise ContractViolation(f"{len(missing)} triple(s) to drop are not in the graph, e.g. {next(iter(missing))}")
    return KnowledgeGraph(G.v, G.r, G.edges - drop)


class Dictionary:
    """Bijection between indices and term strings, separately for nodes and relations.

    Terms are stored in their N-Triples surface form (``<iri>``, ``"lit"@en``,
    ``_:b0``), so an IRI and a literal with the same characters stay distinct.
    """

    def __init__(self, node_terms=(), relation_terms=()):
        self.node_terms: list[str] = []
        self.relation_terms: list[str] = []
        self.node_index: dict[str, int] = {}
        self.relation_index: dict[str, int] = {}
        for t in node_terms:
            self.add_node(t)
        for t in relation_terms:
            self.add_relation(t)

    def add_node(self, term: str) -> int:
        idx = self.node_index.get(term)
        if idx is None:
            idx = self.node_index[term] = len(self.node_terms)
            self.node_terms.append(term)
        return idx

    def add_relation(self, term: str) -> int:
        idx = self.relation_index.get(term)
        if idx is None:
            idx = self.relation_index[term] = len(self.relation_terms)
            self.relation_terms.append(term)
        return idx

    def node(self, idx: int) -> str:
        return self.node_terms[idx]

    def relation(self, idx: int) -> str:
        return self.relation_terms[idx]

    @classmethod
    def synthetic(cls, v: int, r: int) -> "Dictionary":
        """Terms for integer-only graphs: node ``i`` is ``<urn:kgmotive:n:i>``."""
        return cls(
            (f"<{SYNTH_NODE_NS}{i}>" for i in range(v)),
            (f"<{SYNTH_REL_NS}{i}>" for i in range(r)),
        )

    def __eq__(self, other):
        if not isinstance(other, Dictionary):
            return NotImplemented
        return self.node_terms == other.node_terms and self.relation_terms == other.relation_terms

    def __len__(self):
        return len(self.node_terms)


SYNTH_NODE_NS = "urn:kgmotive:n:"
SYNTH_REL_NS = "urn:kgmotive:r:"


def _parse_line(line: str, lineno: int) -> tuple[str, str, str] | None:
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    terms = []
    pos = 0
    n = len(stripped)
    while True:
        while pos < n and stripped[pos] in " \t":
            pos += 1
        if pos >= n:
            raise NTriplesError(lineno, "missing terminating '.'")
        if stripped[pos] == ".":
            rest = stripped[pos + 1:].strip()
            if rest and not rest.startswith("#"):
                raise NTriplesError(lineno, f"unexpected text after '.': {rest[:30]!r}")
            break
        match = _TERM.match(stripped, pos)
        if match is None:
            raise NTriplesError(lineno, f"cannot read a term at column {pos + 1}: {stripped[pos:pos + 30]!r}")
        terms.append(match.group(0))
        pos = match.end()
    if len(terms) != 3:
        raise NTriplesError(lineno, f"expected 3 terms before '.', found {len(terms)}")
    if terms[1].startswith('"') or terms[1].startswith("_:"):
        raise NTriplesError(lineno, "predicate must be an IRI")
    return terms[0], terms[1], terms[2]


def load_ntriples(stream: TextIO | Iterable[str]) -> tuple[KnowledgeGraph, Dictionary]:
    """Read line-oriented N-Triples into a graph plus dictionary.

    Indices are assigned in order of first appearance; duplicate triples
    collapse. Literals are nodes, identified by their full surface string.
    """
    if isinstance(stream, str):
        stream = stream.splitlines()
    d = Dictionary()
    edges = set()
    for lineno, line in enumerate(stream, start=1):
        parsed = _parse_line(line, lineno)
        if parsed is None:
            continue
        s, p, o = parsed
        si = d.add_node(s)
        pi = d.add_relation(p)
        oi = d.add_node(o)
        edges.add((si, pi, oi))
    return KnowledgeGraph(len(d.node_terms), len(d.relation_terms), edges), d


def write_ntriples(G: KnowledgeGraph, d: Dictionary, fh: TextIO):
    for s, p, o in G.edge_list:
        fh.write(f"{d.node(s)} {d.relation(p)} {d.node(o)} .\n")


def write_edgelist(G: KnowledgeGraph, fh: TextIO):
    """Header ``v r m`` then one ``s p o`` line per triple, sorted."""
    fh.write(f"{G.v} {G.r} {G.m}\n")
    for s, p, o in G.edge_list:
        fh.write(f"{s} {p} {o}\n")


def read_edgelist(fh: TextIO | Iterable[str]) -> KnowledgeGraph:
    if isinstance(fh, str):
        fh = fh.splitlines()
    it = iter(fh)
    try:
        header = next(it).split()
        v, r, m = (int(x) for x in header)
    except (StopIteration, ValueError):
        raise KGMotiveError("edge list needs a 'v r m' header line")
    edges = []
    for lineno, line in enumerate(it, start=2):
        if not line.strip():
            continue
        try:
            s, p, o = (int(x) for x in line.split())
        except ValueError:
            raise KGMotiveError(f"line {lineno}: expected 's p o'")
        edges.append((s, p, o))
    G = KnowledgeGraph(v, r, edges)
    if G.m != m:
        raise KGMotiveError(f"header says m={m} but {G.m} distinct triples were read")
    return G
