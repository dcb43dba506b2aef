"""Simulated-annealing search over patterns."""

from __future__ import annotations

import multiprocessing as mp
import os
import random
import sys
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from kgmotive.codes import DEFAULT_PY, PitmanYorConfig
from kgmotive.errors import CanonicalSizeError, InitializationError, PatternError, SearchStuck
from kgmotive.graph import KnowledgeGraph
from kgmotive.matcher import MatchBudget, instance_triples
from kgmotive.motifcode import ScoredMotif, score_pattern
from kgmotive.pattern import MAX_CANONICAL_NODE_VARS, Pattern, canonicalize, is_connected, print_pattern

MOVES = (
    "extend",
    "node_to_var",
    "edge_to_var",
    "var_node_to_const",
    "var_edge_to_const",
    "remove_edge",
    "couple",
)


@dataclass(frozen=True)
class SearchConfig:
    iterations: int = 1000
    workers: int = 1
    accept_prob: float = 0.5
    per_pattern_budget: MatchBudget = field(default_factory=MatchBudget)
    top_per_worker: int = 1000
    rng_seed: int = 0
    progress_every: int = 0

    def __post_init__(self):
        if not 0.0 < self.accept_prob < 1.0:
            raise ValueError("accept_prob must lie strictly between 0 and 1")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


def worker_seed(seed: int, worker_id: int) -> int:
    return int(np.random.SeedSequence([seed, worker_id]).generate_state(1)[0])


def initial_pattern(G: KnowledgeGraph, rng: random.Random) -> Pattern:
    """A random non-loop triple of ``G`` with its relation made a variable."""
    if G.m == 0:
        raise InitializationError("cannot start a search on a graph without triples")
    for _ in range(G.m):
        s, _, o = G.edge_list[rng.randrange(G.m)]
        if s != o:
            return Pattern(((s, -1, o),), 0, 1)
    raise InitializationError("no non-loop triple found to start from")


# --- transitions -----------------------------------------------------------
# Each move returns a new pattern, or None when it does not apply.


def _extend(M, G, instances, rng):
    if not instances:
        return None
    inst = rng.choice(instances)
    produced = set(instance_triples(M, inst))
    label_of = {x: x for x in M.constant_nodes()}
    for i, val in enumerate(inst.nodes):
        label_of[val] = -(i + 1)
    # grow from the nodes the instance binds; constants only when nothing is bound
    anchors = inst.nodes or M.constant_nodes()
    adjacent = set()
    for x in anchors:
        adjacent.update((x, p, o) for p, o in G.out[x])
        adjacent.update((s, p, x) for s, p in G.inc[x])
    adjacent -= produced
    if not adjacent:
        return None
    s, p, o = rng.choice(sorted(adjacent))
    edge = (label_of.get(s, s), p, label_of.get(o, o))
    if edge in M.edges:
        return None
    return Pattern(M.edges + (edge,), M.n_node_vars, M.n_rel_vars)


def _node_to_var(M, G, instances, rng):
    consts = M.constant_nodes()
    if not consts:
        return None
    c = rng.choice(consts)
    new = ("new",)
    return Pattern.from_loose(
        (new if s == c else s, p, new if o == c else o) for s, p, o in M.to_loose()
    )


def _edge_to_var(M, G, instances, rng):
    idx = [i for i, e in enumerate(M.edges) if e[1] >= 0]
    if not idx:
        return None
    i = rng.choice(idx)
    loose = M.to_loose()
    s, _, o = loose[i]
    loose[i] = (s, ("new",), o)
    return Pattern.from_loose(loose)


def _var_node_to_const(M, G, instances, rng):
    if not M.n_node_vars or not instances:
        return None
    x = rng.choice(M.node_var_labels)
    val = rng.choice(instances).nodes[-x - 1]
    key = ("n", x)
    return Pattern.from_loose(
        (val if s == key else s, p, val if o == key else o) for s, p, o in M.to_loose()
    )


def _var_edge_to_const(M, G, instances, rng):
    if not M.n_rel_vars or not instances:
        return None
    x = rng.choice(M.rel_var_labels)
    val = rng.choice(instances).relations[M.rel_var_index(x)]
    key = ("p", x)
    return Pattern.from_loose((s, val if p == key else p, o) for s, p, o in M.to_loose())


def _remove_edge(M, G, instances, rng):
    if len(M.edges) < 2:
        return None
    options = [i for i in range(len(M.edges)) if is_connected(M.edges[:i] + M.edges[i + 1:])]
    if not options:
        return None
    i = rng.choice(options)
    loose = M.to_loose()
    del loose[i]
    return Pattern.from_loose(loose)


def _couple(M, G, instances, rng):
    if M.n_rel_vars < 2 or not instances:
        return None
    labels = M.rel_var_labels
    pairs = []
    for a in range(len(labels)):
        for b in range(a + 1, len(labels)):
            if any(inst.relations[a] == inst.relations[b] for inst in instances):
                pairs.append((labels[a], labels[b]))
    if not pairs:
        return None
    keep, drop = rng.choice(pairs)
    keep_key, drop_key = ("p", keep), ("p", drop)
    return Pattern.from_loose((s, keep_key if p == drop_key else p, o) for s, p, o in M.to_loose())


_MOVE_FUNCS = {
    "extend": _extend,
    "node_to_var": _node_to_var,
    "edge_to_var": _edge_to_var,
    "var_node_to_const": _var_node_to_const,
    "var_edge_to_const": _var_edge_to_const,
    "remove_edge": _remove_edge,
    "couple": _couple,
}


def apply_move(name: str, M: Pattern, G: KnowledgeGraph, instances, rng) -> Pattern | None:
    try:
        cand = _MOVE_FUNCS[name](M, G, instances, rng)
    except PatternError:
        return None
    if cand is None or cand.n_node_vars > MAX_CANONICAL_NODE_VARS:
        return None
    return cand


def transition(M: Pattern, G: KnowledgeGraph, instances, rng: random.Random) -> Pattern:
    """One random move; moves that do not apply or give an invalid pattern are
    replaced by another uniformly chosen move."""
    order = list(MOVES)
    rng.shuffle(order)
    for name in order:
        cand = apply_move(name, M, G, instances, rng)
        if cand is not None:
            return cand
    raise SearchStuck(f"no move applies to {print_pattern(M)}")


def accept(candidate_total: float, current_total: float, rng: random.Random, accept_prob: float) -> bool:
    """Shorter codelength always wins; otherwise move with probability ``accept_prob``."""
    if candidate_total < current_total:
        return True
    return rng.random() < accept_prob


# --- chains ----------------------------------------------------------------


def rank_key(sm: ScoredMotif):
    return (-sm.log_factor, -sm.frequency, print_pattern(sm.pattern))


class _Scorer:
    """Scores canonical patterns, remembering recent instance lists."""

    def __init__(self, G, budget, py, cache_size=128):
        self.G, self.budget, self.py = G, budget, py
        self.cache: OrderedDict = OrderedDict()
        self.cache_size = cache_size
        self.seen: dict[Pattern, ScoredMotif] = {}

    def __call__(self, M):
        try:
            M = canonicalize(M)
        except CanonicalSizeError:
            pass
        hit = self.cache.get(M)
        if hit is not None:
            self.cache.move_to_end(M)
            return hit
        scored, kept = score_pattern(self.G, M, self.budget, self.py)
        self.cache[M] = (scored, kept)
        if len(self.cache) > self.cache_size:
            self.cache.popitem(last=False)
        prev = self.seen.get(M)
        if prev is None or scored.log_factor > prev.log_factor:
            self.seen[M] = scored
        return scored, kept


def anneal(G: KnowledgeGraph, cfg: SearchConfig, worker_id: int = 0,
           py: PitmanYorConfig = DEFAULT_PY) -> list[ScoredMotif]:
    """Run one chain and return its best ``top_per_worker`` patterns."""
    rng = random.Random(worker_seed(cfg.rng_seed, worker_id))
    score = _Scorer(G, cfg.per_pattern_budget, py)
    current, cur_inst = score(initial_pattern(G, rng))
    best = current.log_factor
    for it in range(1, cfg.iterations):
        try:
            cand = transition(current.pattern, G, cur_inst, rng)
        except SearchStuck:
            cand = initial_pattern(G, rng)
        scored, inst = score(cand)
        best = max(best, scored.log_factor)
        if accept(scored.total, current.total, rng, cfg.accept_prob):
            current, cur_inst = scored, inst
        if cfg.progress_every and (it + 1) % cfg.progress_every == 0:
            print(f"{worker_id},{it + 1},{best:.4f}", file=sys.stderr, flush=True)
    return sorted(score.seen.values(), key=rank_key)[: cfg.top_per_worker]


def merge_results(chains) -> list[ScoredMotif]:
    best: dict[Pattern, ScoredMotif] = {}
    for chain in chains:
        for sm in chain:
            prev = best.get(sm.pattern)
            if prev is None or rank_key(sm) < rank_key(prev):
                best[sm.pattern] = sm
    return sorted(best.values(), key=rank_key)


_SHARED: dict = {}


def _pool_anneal(args):
    cfg, worker_id, py = args
    return anneal(_SHARED["G"], cfg, worker_id, py)


def default_pool_size(workers: int) -> int:
    env = os.environ.get("KGMOTIVE_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(workers, os.cpu_count() or 1))


def run_search(G: KnowledgeGraph, cfg: SearchConfig, py: PitmanYorConfig = DEFAULT_PY,
               pool_size: int | None = None) -> list[ScoredMotif]:
    """Independent chains, merged, deduplicated by canonical form and ranked by
    log-factor (ties: higher frequency, then pattern text)."""
    pool_size = default_pool_size(cfg.workers) if pool_size is None else pool_size
    jobs = [(cfg, w, py) for w in range(cfg.workers)]
    if pool_size <= 1 or cfg.workers == 1:
        chains = [anneal(G, cfg, w, py) for w in range(cfg.workers)]
    else:
        _SHARED["G"] = G
        try:
            with ProcessPoolExecutor(pool_size, mp_context=mp.get_context("fork")) as ex:
                chains = list(ex.map(_pool_anneal, jobs))
        finally:
            _SHARED.clear()
    return merge_results(chains)
