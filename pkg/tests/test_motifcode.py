import math
import random

import numpy as np
import pytest

from _oracles import multinomial_by_enumeration, random_graph
from kgmotive.codes import length_nonneg_int, log2_factorial
from kgmotive.errors import ContractViolation
from kgmotive.graph import KnowledgeGraph
from kgmotive.matcher import Instance, MatchBudget, find_instances, prune_overlap
from kgmotive.motifcode import (
    CSV_HEADER,
    DegreeConstraint,
    degree_constraint,
    empty_template_bits,
    instance_structure_bits,
    log_factor,
    motif_bits,
    pattern_bits,
    score_pattern,
    template_graph,
)
from kgmotive.nullmodel import base_bits, degree_bits_lowerbound, el_structure_bits, null_bits
from kgmotive.pattern import Pattern, canonicalize

CYCLE = KnowledgeGraph(2, 1, [(0, 0, 1), (1, 0, 0)])
EDGE = Pattern.from_edges([(-1, -3, -2)])


def _all_instances(G, M):
    return prune_overlap(find_instances(G, M, MatchBudget.unlimited()).instances, M)


def test_degree_constraint_examples():
    dc = degree_constraint(CYCLE, EDGE, [])
    assert dc.k == 0 and not dc.node_counts.any() and not dc.rel_counts.any()
    dc = degree_constraint(CYCLE, EDGE, [Instance((0, 1), (0,)), Instance((1, 0), (0,))])
    assert dc.node_counts.tolist() == [[1, 1], [1, 1]]
    assert dc.rel_counts.tolist() == [[2]]
    dc = degree_constraint(CYCLE, EDGE, [Instance((1, 0), (0,))])
    assert all(seq.sum() == 1 and seq.max() == 1 for seq in dc.sequences())


def test_degree_constraint_rejects_invalid_instance():
    with pytest.raises(ContractViolation):
        degree_constraint(CYCLE, EDGE, [Instance((0, 0), (0,))])


def _dc(node_rows, rel_rows, v=3, r=1):
    node = np.array(node_rows, dtype=np.int64).reshape(len(node_rows), v)
    rel = np.array(rel_rows, dtype=np.int64).reshape(len(rel_rows), r)
    k = int((node if len(node_rows) else rel)[0].sum())
    return DegreeConstraint(node, rel, k)


def test_instance_structure_examples():
    assert instance_structure_bits(_dc([[0, 1, 0], [1, 0, 0]], [[1]])) == 0.0
    assert instance_structure_bits(_dc([[1, 1], [1, 1]], [[2]], v=2)) == pytest.approx(1.0)
    assert instance_structure_bits(_dc([[1, 1, 1], [1, 1, 1]], [])) == pytest.approx(math.log2(6))


def test_instance_structure_counts_sequences():
    # 2^-bits times the product of multinomials recovers k!
    rng = np.random.default_rng(0)
    for _ in range(60):
        k = int(rng.integers(1, 5))
        w, l = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        if w + l == 0:
            continue
        rows = []
        for _ in range(w + l):
            seq = rng.integers(0, 4, size=k)
            rows.append(np.bincount(seq, minlength=4))
        dc = DegreeConstraint(np.array(rows[:w]).reshape(w, 4), np.array(rows[w:]).reshape(l, 4), k)
        product = math.prod(multinomial_by_enumeration(list(r)) for r in rows)
        assert 2.0 ** -instance_structure_bits(dc) * product == pytest.approx(math.factorial(k), rel=1e-9)


def test_reduction_to_edge_list_code():
    rng = random.Random(12)
    for _ in range(40):
        G = random_graph(rng, v_max=10, m_max=25, r_max=4, loops=False)
        if G.m == 0:
            continue
        inst = _all_instances(G, EDGE)
        assert len(inst) == G.m
        dc = degree_constraint(G, EDGE, inst)
        assert abs(instance_structure_bits(dc) - el_structure_bits(G.degrees)) < 1e-9
        bd = motif_bits(G, EDGE, inst)
        assert bd.b_template == pytest.approx(empty_template_bits(G), abs=1e-9)


def test_motif_bits_no_instances():
    G = KnowledgeGraph(3, 2, [(0, 0, 1), (1, 1, 2)])
    bd = motif_bits(G, EDGE, [])
    assert bd.b_template == pytest.approx(base_bits(G.degrees))
    assert bd.total == pytest.approx(bd.b_dim + bd.b_pattern + bd.b_template + bd.b_instances)


def test_motif_bits_single_triple_graph():
    G = KnowledgeGraph(2, 1, [(0, 0, 1)])
    M = Pattern.from_edges([(0, -1, 1)])
    bd = motif_bits(G, M, [Instance((), (0,))])
    assert bd.b_template == pytest.approx(empty_template_bits(G))
    assert instance_structure_bits(degree_constraint(G, M, [Instance((), (0,))])) == 0.0


def test_fully_constant_pattern_pays_for_its_count():
    G = KnowledgeGraph(2, 1, [(0, 0, 1)])
    M = Pattern.from_edges([(0, 0, 1)])
    bd = motif_bits(G, M, [Instance((), ())])
    assert bd.b_instances == pytest.approx(length_nonneg_int(1))


def test_overlapping_instances_rejected():
    M = Pattern.from_edges([(-1, -3, -2), (-2, -3, -1)])
    with pytest.raises(ContractViolation):
        motif_bits(CYCLE, M, [Instance((0, 1), (0,)), Instance((1, 0), (0,))])


def test_pattern_bits_depend_only_on_class():
    a = Pattern.from_edges([(-1, 3, -2), (-2, 4, 7)])
    b = Pattern.from_edges([(-2, 3, -1), (-1, 4, 7)])
    assert pattern_bits(canonicalize(a)) == pattern_bits(canonicalize(b))
    assert pattern_bits(a) > 0


def test_log_factor_of_single_edge_pattern():
    rng = random.Random(21)
    for _ in range(20):
        G = random_graph(rng, v_max=12, m_max=30, r_max=3, loops=False)
        if G.m == 0:
            continue
        sm = log_factor(G, EDGE, MatchBudget.unlimited())
        bd = sm.breakdown
        assert sm.log_factor == pytest.approx(null_bits(G) - bd.total)
        # the structure terms cancel exactly: only headers and degree codes remain
        isb = instance_structure_bits(degree_constraint(G, EDGE, _all_instances(G, EDGE)))
        rest = length_nonneg_int(G.v) + length_nonneg_int(G.r) + degree_bits_lowerbound(G.degrees) - (
            bd.b_dim + bd.b_pattern + bd.b_template + bd.b_instances - isb)
        assert sm.log_factor == pytest.approx(rest, abs=1e-6)
        assert sm.log_factor < 0


def test_planted_motif_compresses():
    rng = random.Random(3)
    n, r = 300, 6
    pairs = set()
    while len(pairs) < 900:
        s, o = rng.randrange(n), rng.randrange(n)
        if s != o:
            pairs.add((s, o))
    edges = {(s, rng.randrange(r), o) for s, o in pairs}
    M = Pattern.from_edges([(-1, 0, -2), (-2, 1, -3), (-3, 2, -1)])
    for _ in range(120):
        a, b, c = rng.sample(range(n), 3)
        edges |= {(a, 0, b), (b, 1, c), (c, 2, a)}
    G = KnowledgeGraph(n, r, edges)
    assert log_factor(G, M, MatchBudget.unlimited()).log_factor > 10


def test_score_pattern_reports_incomplete_matches():
    G = KnowledgeGraph(6, 1, [(s, 0, o) for s in range(6) for o in range(6) if s != o])
    sm, kept = score_pattern(G, EDGE, MatchBudget.deterministic(5))
    assert not sm.complete and sm.frequency == len(kept) == 5


def test_template_graph_and_csv_row():
    inst = _all_instances(CYCLE, EDGE)
    assert template_graph(CYCLE, EDGE, inst).m == 0
    sm = log_factor(CYCLE, EDGE, MatchBudget.unlimited())
    row = sm.csv_row()
    assert len(row) == len(CSV_HEADER) and row[1] == 2
    assert log2_factorial(2) == 1.0
