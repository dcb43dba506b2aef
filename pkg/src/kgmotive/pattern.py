"""Basic graph patterns with variables.

A pattern is a small set of triples over integer labels. Nonnegative labels
are constants (graph node or relation indices). Variable nodes are labeled
``-1 .. -w`` and variable relations ``-w-1 .. -w-l``, so the two ranges are
contiguous and disjoint.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable

from kgmotive.errors import CanonicalSizeError, PatternError, PatternValidityError, ResolutionError

Edge = tuple[int, int, int]

MAX_CANONICAL_NODE_VARS = 10
EXHAUSTIVE_LIMIT = 5040  # w! * l! renumberings tried exhaustively


@dataclass(frozen=True)
class Pattern:
    edges: tuple[Edge, ...]
    n_node_vars: int
    n_rel_vars: int

    def __post_init__(self):
        _validate(self.edges, self.n_node_vars, self.n_rel_vars)

    @classmethod
    def from_edges(cls, edges: Iterable[Edge]) -> "Pattern":
        """Build from labeled edges, inferring the variable counts."""
        edges = tuple(tuple(int(x) for x in e) for e in edges)
        node_vars = {x for s, _, o in edges for x in (s, o) if x < 0}
        rel_vars = {p for _, p, _ in edges if p < 0}
        return cls(edges, len(node_vars), len(rel_vars))

    @classmethod
    def from_loose(cls, edges) -> "Pattern":
        """Build from edges whose variables are arbitrary non-constant keys.

        Any label that is not a nonnegative int is a variable. Node and
        relation keys live in separate namespaces. Variables are numbered in
        order of first occurrence.
        """
        edges = list(edges)
        node_ids: dict = {}
        rel_keys: list = []
        rel_seen = set()
        for s, p, o in edges:
            for x in (s, o):
                if not _is_const(x) and x not in node_ids:
                    node_ids[x] = -(len(node_ids) + 1)
            if not _is_const(p) and p not in rel_seen:
                rel_seen.add(p)
                rel_keys.append(p)
        w = len(node_ids)
        rel_ids = {k: -(w + 1 + i) for i, k in enumerate(rel_keys)}
        out = []
        for s, p, o in edges:
            out.append((
                s if _is_const(s) else node_ids[s],
                p if _is_const(p) else rel_ids[p],
                o if _is_const(o) else node_ids[o],
            ))
        return cls(tuple(out), w, len(rel_keys))

    def is_node_var(self, x: int) -> bool:
        return x < 0

    def node_var_index(self, x: int) -> int:
        """0-based slot of variable node ``x`` in an instance's node bindings."""
        return -x - 1

    def rel_var_index(self, x: int) -> int:
        return -x - self.n_node_vars - 1

    @property
    def node_var_labels(self) -> list[int]:
        return [-(i + 1) for i in range(self.n_node_vars)]

    @property
    def rel_var_labels(self) -> list[int]:
        return [-(self.n_node_vars + 1 + j) for j in range(self.n_rel_vars)]

    def constant_nodes(self) -> list[int]:
        return sorted({x for s, _, o in self.edges for x in (s, o) if x >= 0})

    def constant_relations(self) -> list[int]:
        return sorted({p for _, p, _ in self.edges if p >= 0})

    def node_labels(self) -> list[int]:
        """Node labels in first-occurrence order over the edge sequence."""
        seen = {}
        for s, _, o in self.edges:
            seen.setdefault(s, None)
            seen.setdefault(o, None)
        return list(seen)

    def relation_labels(self) -> list[int]:
        seen = {}
        for _, p, _ in self.edges:
            seen.setdefault(p, None)
        return list(seen)

    def to_loose(self):
        """Edges with variables as tagged keys, ready for editing and ``from_loose``."""
        return [
            (
                s if s >= 0 else ("n", s),
                p if p >= 0 else ("p", p),
                o if o >= 0 else ("n", o),
            )
            for s, p, o in self.edges
        ]

    def __len__(self):
        return len(self.edges)


def _is_const(x) -> bool:
    return isinstance(x, int) and x >= 0


def _validate(edges, w, l):
    if not edges:
        raise PatternValidityError("a pattern needs at least one edge")
    if len(set(edges)) != len(edges):
        raise PatternValidityError("duplicate edge in pattern")
    node_vars = set()
    rel_vars = set()
    for s, p, o in edges:
        for x in (s, o):
            if x < 0:
                node_vars.add(x)
        if p < 0:
            rel_vars.add(p)
    if node_vars != set(range(-w, 0)):
        raise PatternValidityError(f"variable nodes must be exactly -1..-{w}, got {sorted(node_vars)}")
    if rel_vars != set(range(-w - l, -w)):
        raise PatternValidityError(
            f"variable relations must be exactly {-w - 1}..{-w - l}, got {sorted(rel_vars)}"
        )
    if not is_connected(edges):
        raise PatternValidityError("pattern is not weakly connected")


def is_connected(edges) -> bool:
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s, _, o in edges:
        parent[find(s)] = find(o)
    roots = {find(x) for x in list(parent)}
    return len(roots) <= 1


# --- canonical form --------------------------------------------------------


def _describe(label, x, colors):
    if label >= 0:
        return (0, label)
    if label == x:
        return (1, 0)
    return (2, colors[label])


class _Canonizer:
    """Individualization-refinement over the variables of one pattern.

    Colors are ranks of labeling-independent signatures, so the ordered
    partition, and hence the leaf certificates, depend only on the pattern's
    isomorphism class. Transposition twins are explored once.
    """

    def __init__(self, M: Pattern):
        self.M = M
        self.edges = M.edges
        self.edge_set = set(M.edges)
        self.vars = M.node_var_labels + M.rel_var_labels
        self.incidence = {x: [] for x in self.vars}
        for i, e in enumerate(self.edges):
            for pos in range(3):
                if e[pos] < 0:
                    self.incidence[e[pos]].append((i, pos))

    def refine(self, colors):
        n_cells = len(set(colors.values()))
        while True:
            sigs = {}
            for x in self.vars:
                inc = []
                for i, pos in self.incidence[x]:
                    e = self.edges[i]
                    inc.append((pos, _describe(e[0], x, colors), _describe(e[1], x, colors), _describe(e[2], x, colors)))
                inc.sort()
                sigs[x] = (colors[x], tuple(inc))
            ranks = {s: i for i, s in enumerate(sorted(set(sigs.values())))}
            colors = {x: ranks[sigs[x]] for x in self.vars}
            if len(ranks) == n_cells:
                return colors
            n_cells = len(ranks)

    def twins(self, x, y) -> bool:
        def sw(a):
            return y if a == x else x if a == y else a

        return all((sw(s), sw(p), sw(o)) in self.edge_set for s, p, o in self.edges)

    def leaf(self, colors):
        nodes = sorted(self.M.node_var_labels, key=colors.__getitem__)
        rels = sorted(self.M.rel_var_labels, key=colors.__getitem__)
        w = len(nodes)
        relabel = {x: -(i + 1) for i, x in enumerate(nodes)}
        relabel.update({x: -(w + 1 + j) for j, x in enumerate(rels)})
        return tuple(sorted(
            (relabel.get(s, s), relabel.get(p, p), relabel.get(o, o)) for s, p, o in self.edges
        ))

    def search(self, colors):
        colors = self.refine(colors)
        cells: dict[int, list] = {}
        for x in self.vars:
            cells.setdefault(colors[x], []).append(x)
        open_cells = [c for c in sorted(cells) if len(cells[c]) > 1]
        if not open_cells:
            return self.leaf(colors)
        reps: list = []
        for x in sorted(cells[open_cells[0]], reverse=True):
            if not any(self.twins(x, r) for r in reps):
                reps.append(x)
        best = None
        for x in reps:
            split = {y: (colors[y], 0 if y == x else 1) for y in self.vars}
            ranks = {s: i for i, s in enumerate(sorted(set(split.values())))}
            cert = self.search({y: ranks[split[y]] for y in self.vars})
            if best is None or cert < best:
                best = cert
        return best

    def run(self) -> tuple[Edge, ...]:
        if not self.vars:
            return tuple(sorted(self.edges))
        init = {x: 0 for x in self.M.node_var_labels}
        init.update({x: 1 for x in self.M.rel_var_labels})
        return self.search(init)


@lru_cache(maxsize=1 << 16)
def canonicalize(M: Pattern, max_node_vars: int = MAX_CANONICAL_NODE_VARS) -> Pattern:
    """Representative of ``M``'s class under renaming of variables.

    Patterns that differ only by a permutation of variable nodes and of
    variable relations map to the identical ``Pattern``; edges come out sorted.
    Small patterns get the lexicographically smallest renumbering; larger ones
    fall back to individualization-refinement, which is canonical but not
    necessarily minimal.
    """
    if M.n_node_vars > max_node_vars:
        raise CanonicalSizeError(f"pattern has {M.n_node_vars} variable nodes; the bound is {max_node_vars}")
    if math.factorial(M.n_node_vars) * math.factorial(M.n_rel_vars) <= EXHAUSTIVE_LIMIT:
        return Pattern(_lex_min(M), M.n_node_vars, M.n_rel_vars)
    return Pattern(_Canonizer(M).run(), M.n_node_vars, M.n_rel_vars)


def _lex_min(M: Pattern) -> tuple[Edge, ...]:
    """Smallest sorted edge sequence over all renumberings of the variables."""
    w = M.n_node_vars
    best = None
    for nodes in itertools.permutations(M.node_var_labels):
        relabel = {x: -(i + 1) for i, x in enumerate(nodes)}
        for rels in itertools.permutations(M.rel_var_labels):
            relabel.update({x: -(w + 1 + j) for j, x in enumerate(rels)})
            cand = tuple(sorted((relabel.get(s, s), relabel.get(p, p), relabel.get(o, o)) for s, p, o in M.edges))
            if best is None or cand < best:
                best = cand
    return best


# --- text syntax -----------------------------------------------------------

DEFAULT_PREFIXES = {
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
    "owl": "http://www.w3.org/2002/07/owl#",
    "xsd": "http://www.w3.org/2001/XMLSchema#",
    "foaf": "http://xmlns.com/foaf/0.1/",
    "dc": "http://purl.org/dc/elements/1.1/",
    "n": "urn:kgmotive:n:",
    "r": "urn:kgmotive:r:",
}

_TOKEN = re.compile(
    r'\s*(?:'
    r'(?P<var>\?[A-Za-z_][A-Za-z0-9_]*)'
    r'|(?P<iri><[^>]*>)'
    r'|(?P<lit>"(?:[^"\\]|\\.)*"(?:@[A-Za-z]+(?:-[A-Za-z0-9]+)*|\^\^<[^>]*>)?)'
    r'|(?P<bnode>_:[A-Za-z0-9_\-]+)'
    r'|(?P<pname>[A-Za-z][A-Za-z0-9_\-]*:(?:[A-Za-z0-9_\-%/#]|\.(?=[A-Za-z0-9_\-]))*)'
    r'|(?P<dot>\.)'
    r')'
)
_LOCAL = re.compile(r"[A-Za-z0-9_\-]+(?:\.[A-Za-z0-9_\-]+)*")


def load_prefixes(path) -> dict[str, str]:
    """Read a prefix table: ``prefix iri`` per line (Turtle ``@prefix`` lines work too)."""
    table = dict(DEFAULT_PREFIXES)
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.replace("@prefix", "").rstrip(".").split()
        if len(parts) != 2:
            raise PatternError(f"bad prefix line: {line!r}")
        prefix, iri = parts
        table[prefix.rstrip(":")] = iri.strip("<>")
    return table


def _tokenize(text: str):
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise PatternError(f"cannot read pattern text at {text[pos:pos + 30]!r}")
        pos = m.end()
        kind = m.lastgroup
        yield kind, m.group(kind)


def _resolve_term(kind, tok, prefixes):
    if kind == "pname":
        prefix, local = tok.split(":", 1)
        if prefix not in prefixes:
            raise ResolutionError(f"unknown prefix {prefix!r} in {tok!r}")
        return f"<{prefixes[prefix]}{local}>"
    return tok


def parse_pattern(text: str, dictionary, prefixes=None) -> Pattern:
    """Parse ``?n1 <p> ?n2 . ?n2 ?p2 "lit" .`` style text against a dictionary.

    Variables in subject/object position are node variables, in predicate
    position relation variables. Constants may be written in full or with a
    prefix from ``prefixes``.
    """
    prefixes = DEFAULT_PREFIXES if prefixes is None else prefixes
    triples = []
    current = []
    for kind, tok in _tokenize(text):
        if kind == "dot":
            if current:
                triples.append(current)
            current = []
            continue
        current.append((kind, tok))
        if len(current) > 3:
            raise PatternError(f"triple pattern with more than three terms near {tok!r}")
    if current:
        triples.append(current)
    if not triples:
        raise PatternValidityError("empty pattern")
    node_vars: set = set()
    rel_vars: set = set()
    loose = []
    for trip in triples:
        if len(trip) != 3:
            raise PatternError(f"triple pattern needs three terms, got {[t for _, t in trip]}")
        labels = []
        for pos, (kind, tok) in enumerate(trip):
            if kind == "var":
                (rel_vars if pos == 1 else node_vars).add(tok)
                labels.append(("var", tok))
                continue
            term = _resolve_term(kind, tok, prefixes)
            if pos == 1:
                if term not in dictionary.relation_index:
                    raise ResolutionError(f"unknown relation {tok!r}")
                labels.append(dictionary.relation_index[term])
            else:
                if term not in dictionary.node_index:
                    raise ResolutionError(f"unknown node {tok!r}")
                labels.append(dictionary.node_index[term])
        loose.append(tuple(labels))
    both = node_vars & rel_vars
    if both:
        raise PatternError(f"variable used as both node and relation: {sorted(both)}")
    return Pattern.from_loose(loose)


def abbreviate(term: str, prefixes) -> str:
    if term.startswith("<") and term.endswith(">"):
        iri = term[1:-1]
        best = None
        for prefix, ns in prefixes.items():
            if iri.startswith(ns) and (best is None or len(ns) > len(prefixes[best])):
                local = iri[len(ns):]
                if _LOCAL.fullmatch(local):
                    best = prefix
        if best is not None:
            return f"{best}:{iri[len(prefixes[best]):]}"
    return term


def print_pattern(M: Pattern, dictionary=None, prefixes=None, sep: str = " ") -> str:
    """Render a pattern; without a dictionary constants are printed as indices."""
    prefixes = DEFAULT_PREFIXES if prefixes is None else prefixes

    def node(x):
        if x < 0:
            return f"?n{-x}"
        return str(x) if dictionary is None else abbreviate(dictionary.node(x), prefixes)

    def rel(x):
        if x < 0:
            return f"?p{-x}"
        return str(x) if dictionary is None else abbreviate(dictionary.relation(x), prefixes)

    return sep.join(f"{node(s)} {rel(p)} {node(o)} ." for s, p, o in M.edges)
