"""Random knowledge graphs, random patterns, motif injection, and the two
random-graph experiments."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import NamedTuple

from kgmotive.codes import DEFAULT_PY, PitmanYorConfig
from kgmotive.errors import InjectionError, PatternError
from kgmotive.graph import KnowledgeGraph
from kgmotive.matcher import Instance, MatchBudget, instance_triples
from kgmotive.motifcode import ScoredMotif, log_factor
from kgmotive.pattern import Pattern, is_connected
from kgmotive.search import SearchConfig, run_search, worker_seed

MUTAG_DIMS = (23644, 74567, 24)
AIFB_DIMS = (8285, 29226, 47)
DOGFOOD_DIMS = (7611, 242256, 170)


@dataclass(frozen=True)
class SynthSpec:
    n: int
    m: int
    r: int
    k: int = 0
    rng_seed: int = 0

    def __post_init__(self):
        if self.n < 0 or self.m < 0 or self.r < 1 or self.k < 0:
            raise ValueError(f"invalid synthetic spec {self}")
        if self.m > self.n * (self.n - 1):
            raise ValueError(f"m={self.m} edges do not fit in a simple digraph on n={self.n} nodes")


def _sample_pairs(n: int, m: int, rng: random.Random) -> list[tuple[int, int]]:
    """``m`` distinct ordered pairs ``(s, o)`` with ``s != o``, uniformly."""
    if m > n * (n - 1):
        raise ValueError(f"cannot place {m} edges on {n} nodes without loops or multi-edges")
    pairs = []
    for idx in rng.sample(range(n * (n - 1)), m):
        s, t = divmod(idx, n - 1)
        pairs.append((s, t if t < s else t + 1))
    return pairs


def sample_er_kg(spec: SynthSpec, rng: random.Random | None = None) -> KnowledgeGraph:
    """G(n, m) digraph, each edge labeled with a uniform random relation."""
    rng = rng or random.Random(spec.rng_seed)
    pairs = _sample_pairs(spec.n, spec.m, rng)
    return KnowledgeGraph(spec.n, spec.r, ((s, rng.randrange(spec.r), o) for s, o in pairs))


def sample_pattern(G: KnowledgeGraph, rng: random.Random, max_attempts: int = 10000) -> Pattern:
    """Random pattern: 3-6 nodes, n..n^2-n links, a uniform number of nodes and
    links turned into variables, constants drawn uniformly from the graph.
    Disconnected draws are rejected."""
    if G.v < 6 or G.r < 1:
        raise ValueError("graph too small to draw pattern constants from")
    for _ in range(max_attempts):
        n = rng.randint(3, 6)
        m = rng.randint(n, n * n - n)
        pairs = _sample_pairs(n, m, rng)
        var_nodes = set(rng.sample(range(n), rng.randint(0, n)))
        var_links = set(rng.sample(range(m), rng.randint(0, m)))
        const_values = rng.sample(range(G.v), n)
        node_label = [("v", i) if i in var_nodes else const_values[i] for i in range(n)]
        edges = []
        for j, (a, b) in enumerate(pairs):
            rel = ("p", j) if j in var_links else rng.randrange(G.r)
            edges.append((node_label[a], rel, node_label[b]))
        if not is_connected([(node_label[a], 0, node_label[b]) for a, b in pairs]):
            continue
        try:
            return Pattern.from_loose(edges)
        except PatternError:
            continue
    raise RuntimeError("could not sample a valid pattern")


def inject(G: KnowledgeGraph, M: Pattern, k: int, rng: random.Random,
           max_attempts: int | None = None) -> tuple[KnowledgeGraph, list[Instance]]:
    """Plant ``k`` random instances of ``M``; triples already present are kept once."""
    if k == 0:
        return G, []
    w = M.n_node_vars
    if w > G.v:
        raise InjectionError(f"pattern needs {w} distinct nodes, graph has {G.v}")
    max_attempts = max_attempts or 100 * k
    planted = []
    new_triples = set()
    attempts = 0
    while len(planted) < k:
        attempts += 1
        if attempts > max_attempts:
            raise InjectionError(f"planted only {len(planted)} of {k} instances")
        inst = Instance(tuple(rng.sample(range(G.v), w)), tuple(rng.randrange(G.r) for _ in range(M.n_rel_vars)))
        triples = instance_triples(M, inst)
        if len(set(triples)) != len(triples):
            continue
        planted.append(inst)
        new_triples.update(triples)
    return KnowledgeGraph(G.v, G.r, G.edges | new_triples), planted


# --- experiments -----------------------------------------------------------


class InjectionRow(NamedTuple):
    k: int
    repeat: int
    frequency: int
    log_factor: float
    complete: bool


INJECTION_CSV_HEADER = ["k", "repeat", "frequency", "log_factor"]


def _rng(seed: int, *path: int) -> random.Random:
    """Independent stream for one (repeat, purpose) slot of an experiment."""
    key = 0
    for x in path:
        key = key * 1_000_003 + int(x) + 1
    return random.Random(worker_seed(seed, key & 0x7FFFFFFFFFFF))


def run_injection_experiment(dims, k_values, repeats: int, rng_seed: int = 0,
                             budget: MatchBudget | None = None,
                             py: PitmanYorConfig = DEFAULT_PY) -> list[InjectionRow]:
    """Score a planted pattern directly (no search) across ``k`` and repeats.

    Each repeat draws a fresh graph and pattern; within one repeat the same
    graph, pattern and instance stream are reused for every k, so that larger
    k plants a superset of the instances planted for smaller k.
    """
    n, m, r = dims
    rows = []
    for rep in range(repeats):
        G = sample_er_kg(SynthSpec(n, m, r), _rng(rng_seed, rep, 0))
        M = sample_pattern(G, _rng(rng_seed, rep, 1))
        for k in k_values:
            Gk, _ = inject(G, M, k, _rng(rng_seed, rep, 2))
            sm = log_factor(Gk, M, budget, py)
            rows.append(InjectionRow(k, rep, sm.frequency, sm.log_factor, sm.complete))
    return rows


class SingleResult(NamedTuple):
    planted: Pattern
    motifs: list[ScoredMotif]
    # per comparison k: the same motifs rescored on a fresh graph with k instances
    comparisons: dict[int, list[ScoredMotif]]
    graph: KnowledgeGraph


def run_single_experiment(dims, k: int, search: SearchConfig, rng_seed: int = 0,
                          compare_k=(0, 150), top: int = 10, pattern: Pattern | None = None,
                          py: PitmanYorConfig = DEFAULT_PY, pool_size: int | None = None) -> SingleResult:
    """Plant one pattern k times, search, and rescore the top motifs on graphs
    with other instance counts."""
    n, m, r = dims
    G = sample_er_kg(SynthSpec(n, m, r), _rng(rng_seed, 0, 0))
    M = pattern if pattern is not None else sample_pattern(G, _rng(rng_seed, 0, 1))
    Gk, _ = inject(G, M, k, _rng(rng_seed, 0, 2))
    found = run_search(Gk, search, py, pool_size)[:top]
    comparisons = {}
    for i, kc in enumerate(compare_k):
        Gc = sample_er_kg(SynthSpec(n, m, r), _rng(rng_seed, i + 1, 0))
        Gc, _ = inject(Gc, M, kc, _rng(rng_seed, i + 1, 2))
        comparisons[kc] = [log_factor(Gc, sm.pattern, search.per_pattern_budget, py) for sm in found]
    return SingleResult(M, found, comparisons, Gk)
