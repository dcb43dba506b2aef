"""Motif mining in knowledge graphs by compression."""

from kgmotive.codes import PitmanYorConfig
from kgmotive.graph import Dictionary, KnowledgeGraph, load_ntriples
from kgmotive.matcher import MatchBudget, find_instances, prune_overlap
from kgmotive.motifcode import ScoredMotif, log_factor, motif_bits
from kgmotive.nullmodel import null_bits
from kgmotive.pattern import Pattern, canonicalize, parse_pattern, print_pattern
from kgmotive.search import SearchConfig, run_search

__version__ = "0.1.0"

__all__ = [
    "Dictionary",
    "KnowledgeGraph",
    "MatchBudget",
    "Pattern",
    "PitmanYorConfig",
    "ScoredMotif",
    "SearchConfig",
    "canonicalize",
    "find_instances",
    "load_ntriples",
    "log_factor",
    "motif_bits",
    "null_bits",
    "parse_pattern",
    "print_pattern",
    "prune_overlap",
    "run_search",
]
