import math
import random

import numpy as np
import pytest

from _oracles import graphs_by_degree_sequence, random_graph
from kgmotive.codes import length_nonneg_int, pitman_yor_length
from kgmotive.errors import ContractViolation
from kgmotive.graph import KnowledgeGraph
from kgmotive.nullmodel import (
    DegreeSequence,
    base_bits,
    degree_bits_fair,
    degree_bits_lowerbound,
    el_structure_bits,
    empirical_bits,
    null_bits,
)


def _D(d_in, d_rel, d_out):
    return DegreeSequence(np.array(d_in), np.array(d_rel), np.array(d_out))


def test_el_examples():
    assert el_structure_bits(_D([0, 1], [1], [1, 0])) == 0.0
    assert el_structure_bits(_D([1, 1], [2], [1, 1])) == pytest.approx(1.0)
    assert el_structure_bits(_D([1, 2], [3], [2, 1])) == pytest.approx(math.log2(6) - 2)


def test_el_rejects_inconsistent():
    with pytest.raises(ContractViolation):
        el_structure_bits(_D([1, 1], [1], [1, 1]))


def test_el_is_permutation_invariant():
    rng = np.random.default_rng(0)
    D = _D([3, 0, 2, 1], [4, 2], [1, 1, 2, 2])
    for _ in range(10):
        perm = rng.permutation(4)
        P = _D(D.d_in[perm], D.d_rel[::-1], D.d_out[rng.permutation(4)])
        assert el_structure_bits(P) == pytest.approx(el_structure_bits(D), abs=1e-12)


def test_el_lower_bounds_ds_small():
    for v, r, m in [(2, 1, 2), (2, 2, 3), (3, 1, 3)]:
        for (d_in, d_rel, d_out), count in graphs_by_degree_sequence(v, r, m).items():
            assert el_structure_bits(_D(d_in, d_rel, d_out)) >= math.log2(count) - 1e-9


@pytest.mark.parametrize("seq, bits", [([1, 1, 1], 0.0), ([0, 1], 2.0), ([2, 1, 1, 0], 6.0), ([], 0.0)])
def test_empirical_bits(seq, bits):
    assert empirical_bits(seq) == pytest.approx(bits)


def test_fair_degree_bits_composition():
    D = _D([0], [0], [0])
    assert degree_bits_fair(D) == pytest.approx(3 * pitman_yor_length([0]))
    D = _D([1, 1], [2], [1, 1])
    expected = pitman_yor_length([1, 1]) + pitman_yor_length([2]) + pitman_yor_length([1, 1])
    assert degree_bits_fair(D) == pytest.approx(expected)


def test_null_bits_examples():
    header = length_nonneg_int(2) + length_nonneg_int(1)
    # [0,1] and [1,0] cost two bits each under their empirical distribution; [1] is free
    assert null_bits(KnowledgeGraph(2, 1, [(0, 0, 1)])) == pytest.approx(header + 4.0)
    assert null_bits(KnowledgeGraph(1, 0)) == pytest.approx(length_nonneg_int(1) + length_nonneg_int(0))
    cycle = KnowledgeGraph(2, 1, [(0, 0, 1), (1, 0, 0)])
    assert null_bits(cycle) == pytest.approx(header + 0.0 + 1.0)


def test_lowerbound_below_fair_and_fair_positive():
    rng = random.Random(11)
    for _ in range(300):
        D = random_graph(rng, v_max=30, m_max=60, r_max=5).degrees
        assert degree_bits_lowerbound(D) <= degree_bits_fair(D)
        assert degree_bits_fair(D) > 0


def test_base_bits_is_fair_plus_structure():
    D = KnowledgeGraph(3, 2, [(0, 0, 1), (1, 1, 2), (2, 0, 0)]).degrees
    assert base_bits(D) == pytest.approx(degree_bits_fair(D) + el_structure_bits(D))
