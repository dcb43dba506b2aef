"""Edge-list approximation of the configuration model, and the two ways of
paying for the degree sequence it is conditioned on."""

from __future__ import annotations

import numpy as np

from kgmotive.codes import DEFAULT_PY, PitmanYorConfig, length_nonneg_int, log2_factorial, pitman_yor_length, sum_log2_factorial
from kgmotive.errors import ContractViolation
from kgmotive.graph import DegreeSequence, KnowledgeGraph, degree_sequence

__all__ = [
    "DegreeSequence",
    "degree_bits_fair",
    "degree_bits_lowerbound",
    "degree_sequence",
    "el_structure_bits",
    "null_bits",
]


def el_structure_bits(D: DegreeSequence) -> float:
    """``2 log(m!) - sum log(d_in!) - sum log(d_rel!) - sum log(d_out!)``."""
    if not D.is_consistent():
        raise ContractViolation(
            f"inconsistent degree sequence: sums {int(D.d_in.sum())}/{int(D.d_rel.sum())}/{int(D.d_out.sum())}"
        )
    m = D.m
    return (
        2.0 * log2_factorial(m)
        - sum_log2_factorial(D.d_in)
        - sum_log2_factorial(D.d_rel)
        - sum_log2_factorial(D.d_out)
    )


def empirical_bits(seq) -> float:
    """Codelength of ``seq`` under its own empirical distribution, with no model cost."""
    arr = np.asarray(seq, dtype=np.int64)
    n = arr.size
    if n == 0:
        return 0.0
    _, counts = np.unique(arr, return_counts=True)
    counts = counts.astype(np.float64)
    return float(n * np.log2(n) - (counts * np.log2(counts)).sum())


def degree_bits_lowerbound(D: DegreeSequence) -> float:
    """Optimistic degree cost used by the null competitor (it is allowed to cheat)."""
    return empirical_bits(D.d_in) + empirical_bits(D.d_rel) + empirical_bits(D.d_out)


def degree_bits_fair(D: DegreeSequence, cfg: PitmanYorConfig = DEFAULT_PY) -> float:
    return pitman_yor_length(D.d_in, cfg) + pitman_yor_length(D.d_rel, cfg) + pitman_yor_length(D.d_out, cfg)


def base_bits(D: DegreeSequence, cfg: PitmanYorConfig = DEFAULT_PY) -> float:
    """Fair EL code for a graph whose dimensions are already known."""
    return degree_bits_fair(D, cfg) + el_structure_bits(D)


def null_bits(G: KnowledgeGraph) -> float:
    cache = G.__dict__.setdefault("_null_bits", None)
    if cache is None:
        D = G.degrees
        cache = (
            length_nonneg_int(G.v)
            + length_nonneg_int(G.r)
            + degree_bits_lowerbound(D)
            + el_structure_bits(D)
        )
        G.__dict__["_null_bits"] = cache
    return cache
