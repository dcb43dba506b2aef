"""Codelength of a graph described through a pattern and its instances,
and the log-factor that compares it with the null model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kgmotive.codes import DEFAULT_PY, PitmanYorConfig, length_nonneg_int, log2_factorial, pitman_yor_length, sum_log2_factorial
from kgmotive.errors import CanonicalSizeError, ContractViolation
from kgmotive.graph import DegreeSequence, KnowledgeGraph, degree_sequence, remove_triples
from kgmotive.matcher import Instance, MatchBudget, find_instances, instance_triples, is_valid_instance, prune_overlap
from kgmotive.nullmodel import base_bits, null_bits
from kgmotive.pattern import Pattern, canonicalize, print_pattern

SIGNIFICANCE_BITS = 10.0


@dataclass(frozen=True)
class DegreeConstraint:
    node_counts: np.ndarray  # (w, v): how often each node fills variable-node slot i
    rel_counts: np.ndarray  # (l, r)
    k: int

    @property
    def w(self) -> int:
        return self.node_counts.shape[0]

    @property
    def l(self) -> int:
        return self.rel_counts.shape[0]

    def sequences(self):
        yield from self.node_counts
        yield from self.rel_counts


@dataclass(frozen=True)
class CodeBreakdown:
    b_dim: float
    b_pattern: float
    b_template: float
    b_instances: float

    @property
    def total(self) -> float:
        return self.b_dim + self.b_pattern + self.b_template + self.b_instances


@dataclass(frozen=True)
class ScoredMotif:
    pattern: Pattern
    frequency: int
    breakdown: CodeBreakdown
    log_factor: float
    complete: bool = True

    @property
    def significant(self) -> bool:
        return self.log_factor > SIGNIFICANCE_BITS

    @property
    def total(self) -> float:
        return self.breakdown.total

    def csv_row(self, dictionary=None, prefixes=None) -> list:
        b = self.breakdown
        return [
            f"{self.log_factor:.4f}",
            self.frequency,
            print_pattern(self.pattern, dictionary, prefixes),
            f"{b.b_dim:.4f}",
            f"{b.b_pattern:.4f}",
            f"{b.b_template:.4f}",
            f"{b.b_instances:.4f}",
        ]


CSV_HEADER = ["log_factor", "frequency", "pattern", "b_dim", "b_pattern", "b_template", "b_instances"]


def _counts(G: KnowledgeGraph, M: Pattern, instances) -> DegreeConstraint:
    w, l, k = M.n_node_vars, M.n_rel_vars, len(instances)
    node_counts = np.zeros((w, G.v), dtype=np.int64)
    rel_counts = np.zeros((l, G.r), dtype=np.int64)
    if k:
        nodes = np.array([inst.nodes for inst in instances], dtype=np.int64).reshape(k, w)
        rels = np.array([inst.relations for inst in instances], dtype=np.int64).reshape(k, l)
        for i in range(w):
            node_counts[i] = np.bincount(nodes[:, i], minlength=G.v)
        for j in range(l):
            rel_counts[j] = np.bincount(rels[:, j], minlength=G.r)
    return DegreeConstraint(node_counts, rel_counts, k)


def degree_constraint(G: KnowledgeGraph, M: Pattern, instances) -> DegreeConstraint:
    for inst in instances:
        if not is_valid_instance(G, M, inst):
            raise ContractViolation(f"not a valid instance of the pattern: {inst}")
    return _counts(G, M, instances)


def instance_structure_bits(dc: DegreeConstraint) -> float:
    """``(w+l-1) log(k!) - sum log(D_i^j!) - sum log(C_i^j!)``."""
    if dc.k <= 1:
        return 0.0
    return (
        (dc.w + dc.l - 1) * log2_factorial(dc.k)
        - sum_log2_factorial(dc.node_counts)
        - sum_log2_factorial(dc.rel_counts)
    )


def _interleave(x: int) -> int:
    return 2 * x if x >= 0 else -2 * x - 1


def pattern_bits(M: Pattern, cfg: PitmanYorConfig = DEFAULT_PY) -> float:
    """Structure of the pattern under the fair base code, plus its labels.

    Labels are replaced by contiguous indices in first-occurrence order; the
    label sequence (nodes, then relations, in index order) goes through the
    Pitman-Yor code with negatives interleaved into the nonnegatives.
    """
    node_labels = M.node_labels()
    rel_labels = M.relation_labels()
    node_idx = {x: i for i, x in enumerate(node_labels)}
    rel_idx = {x: i for i, x in enumerate(rel_labels)}
    d_in = np.zeros(len(node_labels), dtype=np.int64)
    d_out = np.zeros(len(node_labels), dtype=np.int64)
    d_rel = np.zeros(len(rel_labels), dtype=np.int64)
    for s, p, o in M.edges:
        d_out[node_idx[s]] += 1
        d_in[node_idx[o]] += 1
        d_rel[rel_idx[p]] += 1
    structure = base_bits(DegreeSequence(d_in, d_rel, d_out), cfg)
    labels = [_interleave(x) for x in node_labels + rel_labels]
    return structure + pitman_yor_length(labels, cfg)


def _template_degrees(G: KnowledgeGraph, triples) -> DegreeSequence:
    D = G.degrees
    if not triples:
        return D
    arr = np.array(triples, dtype=np.int64)
    return DegreeSequence(
        D.d_in - np.bincount(arr[:, 2], minlength=G.v),
        D.d_rel - np.bincount(arr[:, 1], minlength=G.r),
        D.d_out - np.bincount(arr[:, 0], minlength=G.v),
    )


def _motif_bits(G, M, instances, cfg, dc) -> CodeBreakdown:
    produced = [t for inst in instances for t in instance_triples(M, inst)]
    if len(set(produced)) != len(produced):
        raise ContractViolation("instances overlap: some triple is produced twice")
    b_dim = length_nonneg_int(G.v) + length_nonneg_int(G.r) + length_nonneg_int(G.m)
    b_pattern = pattern_bits(M, cfg)
    b_template = base_bits(_template_degrees(G, produced), cfg)
    b_instances = instance_structure_bits(dc) + sum(pitman_yor_length(seq, cfg) for seq in dc.sequences())
    if dc.w + dc.l == 0:
        # nothing implies k for a fully constant pattern
        b_instances += length_nonneg_int(dc.k)
    return CodeBreakdown(b_dim, b_pattern, b_template, b_instances)


def motif_bits(G: KnowledgeGraph, M: Pattern, instances, cfg: PitmanYorConfig = DEFAULT_PY) -> CodeBreakdown:
    """Dimensions, pattern, template graph and instances, in bits.

    ``instances`` must be pairwise edge-disjoint valid instances of ``M``.
    """
    return _motif_bits(G, M, instances, cfg, degree_constraint(G, M, instances))


def score_pattern(G: KnowledgeGraph, M: Pattern, budget: MatchBudget | None = None,
                  cfg: PitmanYorConfig = DEFAULT_PY) -> tuple[ScoredMotif, list[Instance]]:
    """Match, prune and score; returns the scored motif and the kept instances.

    The pattern is canonicalized first (when small enough) so that the
    pattern cost does not depend on how its variables happen to be numbered.
    """
    try:
        M = canonicalize(M)
    except CanonicalSizeError:
        pass
    result = find_instances(G, M, budget)
    kept = prune_overlap(result.instances, M)
    breakdown = _motif_bits(G, M, kept, cfg, _counts(G, M, kept))
    scored = ScoredMotif(M, len(kept), breakdown, null_bits(G) - breakdown.total, result.complete)
    return scored, kept


def log_factor(G: KnowledgeGraph, M: Pattern, budget: MatchBudget | None = None,
               cfg: PitmanYorConfig = DEFAULT_PY) -> ScoredMotif:
    return score_pattern(G, M, budget, cfg)[0]


def template_graph(G: KnowledgeGraph, M: Pattern, instances) -> KnowledgeGraph:
    return remove_triples(G, {t for inst in instances for t in instance_triples(M, inst)})


def empty_template_bits(G: KnowledgeGraph, cfg: PitmanYorConfig = DEFAULT_PY) -> float:
    return base_bits(degree_sequence(KnowledgeGraph(G.v, G.r)), cfg)
