"""Instance search for patterns with variables.

Semantics differ slightly from SPARQL basic graph patterns: variable nodes
bind pairwise distinct graph nodes, and distinct pattern edges must map to
distinct graph triples. Relation variables are free to coincide with each
other and with constants.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import NamedTuple

from kgmotive.errors import ContractViolation
from kgmotive.graph import KnowledgeGraph, Triple
from kgmotive.pattern import Pattern


class Instance(NamedTuple):
    nodes: tuple[int, ...]
    relations: tuple[int, ...]


@dataclass(frozen=True)
class MatchBudget:
    """Limits on one instance search.

    ``max_steps`` counts candidate triples examined; together with
    ``max_instances`` it gives a deterministic effort cap.
    """

    wall_clock_limit: float | None = 5.0
    max_instances: int | None = None
    max_steps: int | None = None

    def __post_init__(self):
        if self.wall_clock_limit is None and self.max_instances is None and self.max_steps is None:
            raise ValueError("MatchBudget needs at least one limit; use MatchBudget.unlimited() for none")

    @classmethod
    def unlimited(cls) -> "MatchBudget":
        return cls(float("inf"))

    @classmethod
    def deterministic(cls, max_instances: int, max_steps: int | None = None) -> "MatchBudget":
        return cls(None, max_instances, max_steps)


class MatchResult(NamedTuple):
    instances: list[Instance]
    complete: bool


def instance_triples(M: Pattern, inst: Instance) -> tuple[Triple, ...]:
    """The graph triples an instance produces, in pattern-edge order."""
    w = M.n_node_vars
    nodes, rels = inst.nodes, inst.relations
    out = []
    for s, p, o in M.edges:
        out.append((
            s if s >= 0 else nodes[-s - 1],
            p if p >= 0 else rels[-p - w - 1],
            o if o >= 0 else nodes[-o - 1],
        ))
    return tuple(out)


def is_valid_instance(G: KnowledgeGraph, M: Pattern, inst: Instance) -> bool:
    if len(inst.nodes) != M.n_node_vars or len(inst.relations) != M.n_rel_vars:
        return False
    if len(set(inst.nodes)) != len(inst.nodes):
        return False
    if any(not 0 <= x < G.v for x in inst.nodes) or any(not 0 <= x < G.r for x in inst.relations):
        return False
    triples = instance_triples(M, inst)
    return len(set(triples)) == len(triples) and all(t in G.edges for t in triples)


class _Stop(Exception):
    pass


def _check_constants(G, M):
    for s, p, o in M.edges:
        for x in (s, o):
            if x >= G.v:
                raise ContractViolation(f"constant node {x} out of range (v={G.v})")
        if p >= G.r:
            raise ContractViolation(f"constant relation {p} out of range (r={G.r})")


def _candidate_sets(G: KnowledgeGraph, M: Pattern):
    """Per variable node, the graph nodes compatible with every incident edge
    considered on its own (constants pinned, degree >= 1 where free)."""
    cands: dict[int, set] = {}

    def restrict(x, values):
        cur = cands.get(x)
        cands[x] = set(values) if cur is None else cur.intersection(values)

    for s, p, o in M.edges:
        if s < 0:
            if o >= 0 and p >= 0:
                restrict(s, G.po_index.get((p, o), ()))
            elif o >= 0:
                restrict(s, (a for a, _ in G.inc[o]))
            elif p >= 0:
                restrict(s, (a for a, _ in G.by_rel[p]))
            else:
                restrict(s, (i for i in range(G.v) if G.out[i]))
        if o < 0:
            if s >= 0 and p >= 0:
                restrict(o, G.sp_index.get((s, p), ()))
            elif s >= 0:
                restrict(o, (b for _, b in G.out[s]))
            elif p >= 0:
                restrict(o, (b for _, b in G.by_rel[p]))
            else:
                restrict(o, (i for i in range(G.v) if G.inc[i]))
    return cands


def _estimate(G, edge, cands, bound):
    """Rough count of graph triples an edge could match given what is bound."""
    s, p, o = edge
    s_known = s >= 0 or s in bound
    o_known = o >= 0 or o in bound
    if s_known and o_known:
        return 1
    if s >= 0:
        return len(G.sp_index.get((s, p), ())) if p >= 0 else len(G.out[s])
    if o >= 0:
        return len(G.po_index.get((p, o), ())) if p >= 0 else len(G.inc[o])
    if s_known or o_known:
        x = o if s_known else s
        return len(cands.get(x, ())) or 1
    base = len(G.by_rel[p]) if p >= 0 else G.m
    return min(base, len(cands.get(s, ())) * 4 + 1, len(cands.get(o, ())) * 4 + 1)


def _edge_order(G, M, cands):
    remaining = list(range(len(M.edges)))
    bound: set = set()
    order = []
    while remaining:
        def key(i):
            s, p, o = M.edges[i]
            new_vars = sum(1 for x in {s, o} if x < 0 and x not in bound) + (1 if p < 0 and p not in bound else 0)
            touches = (s < 0 and s in bound) or (o < 0 and o in bound) or (p < 0 and p in bound)
            return (0 if touches or not bound else 1, new_vars, _estimate(G, M.edges[i], cands, bound), i)

        best = min(remaining, key=key)
        remaining.remove(best)
        order.append(M.edges[best])
        s, p, o = M.edges[best]
        bound.update(x for x in (s, p, o) if x < 0)
    return order


def find_instances(G: KnowledgeGraph, M: Pattern, budget: MatchBudget | None = None) -> MatchResult:
    """Enumerate instances of ``M`` in ``G`` by backtracking over pattern edges.

    Edges are visited most-constrained first and candidate triples in
    ascending index order, so the output order is deterministic. If a budget
    limit cuts the search short, ``complete`` is False and the instances
    found so far are returned.
    """
    budget = budget or MatchBudget()
    _check_constants(G, M)
    cands = _candidate_sets(G, M)
    if any(not c for c in cands.values()):
        return MatchResult([], True)

    w = M.n_node_vars
    order = _edge_order(G, M, cands)
    n_edges = len(order)
    # node var x binds slot -x-1; relation var y binds slot -y-w-1
    nodes: list = [None] * w
    rels: list = [None] * M.n_rel_vars
    used_nodes: set = set()
    used_triples: set = set()
    found: list[Instance] = []

    max_inst = budget.max_instances
    max_steps = budget.max_steps
    deadline = None
    if budget.wall_clock_limit is not None and budget.wall_clock_limit != float("inf"):
        deadline = time.monotonic() + budget.wall_clock_limit
    steps = 0

    out, inc, so_index, sp_index, po_index, by_rel = G.out, G.inc, G.so_index, G.sp_index, G.po_index, G.by_rel

    def tick():
        nonlocal steps
        steps += 1
        if max_steps is not None and steps > max_steps:
            raise _Stop
        if deadline is not None and (steps & 1023) == 0 and time.monotonic() > deadline:
            raise _Stop

    def step(depth):
        if depth == n_edges:
            found.append(Instance(tuple(nodes), tuple(rels)))
            if max_inst is not None and len(found) >= max_inst:
                raise _Stop
            return
        s, p, o = order[depth]
        sv = s if s >= 0 else nodes[-s - 1]
        ov = o if o >= 0 else nodes[-o - 1]
        pv = p if p >= 0 else rels[-p - w - 1]

        if sv is not None and ov is not None:
            cand = [(sv, q, ov) for q in so_index.get((sv, ov), ()) if pv is None or q == pv]
        elif sv is not None:
            if pv is not None:
                cand = [(sv, pv, b) for b in sp_index.get((sv, pv), ())]
            else:
                cand = [(sv, q, b) for q, b in out[sv]]
        elif ov is not None:
            if pv is not None:
                cand = [(a, pv, ov) for a in po_index.get((pv, ov), ())]
            else:
                cand = [(a, q, ov) for a, q in inc[ov]]
        else:
            if pv is not None:
                cand = [(a, pv, b) for a, b in by_rel[pv]]
            else:
                cand = G.edge_list
            if s == o:
                cand = [t for t in cand if t[0] == t[2]]

        s_free = sv is None
        o_free = ov is None and o != s
        p_free = pv is None
        s_c = cands.get(s) if s_free else None
        o_c = cands.get(o) if o_free else None
        for t in cand:
            tick()
            if t in used_triples:
                continue
            a, q, b = t
            if s_free:
                if a in used_nodes or a not in s_c:
                    continue
            if o_free:
                if b in used_nodes or b not in o_c or (s_free and a == b):
                    continue
            if s_free:
                nodes[-s - 1] = a
                used_nodes.add(a)
            if o_free:
                nodes[-o - 1] = b
                used_nodes.add(b)
            if p_free:
                rels[-p - w - 1] = q
            used_triples.add(t)
            try:
                step(depth + 1)
            finally:
                used_triples.discard(t)
                if s_free:
                    nodes[-s - 1] = None
                    used_nodes.discard(a)
                if o_free:
                    nodes[-o - 1] = None
                    used_nodes.discard(b)
                if p_free:
                    rels[-p - w - 1] = None

    try:
        step(0)
    except _Stop:
        return MatchResult(found, False)
    return MatchResult(found, True)


def prune_overlap(instances, M: Pattern) -> list[Instance]:
    """Greedy scan: keep an instance unless it shares a triple with one kept earlier."""
    taken: set = set()
    kept = []
    for inst in instances:
        triples = instance_triples(M, inst)
        if any(t in taken for t in triples):
            continue
        taken.update(triples)
        kept.append(inst)
    return kept
