"""CSV and LaTeX table emitters, and run manifests."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path

from kgmotive.motifcode import CSV_HEADER, ScoredMotif
from kgmotive.pattern import print_pattern

_LATEX_SPECIAL = {
    "\\": r"\textbackslash{}",
    "{": r"\{",
    "}": r"\}",
    "_": r"\_",
    "&": r"\&",
    "%": r"\%",
    "$": r"\$",
    "#": r"\#",
    "^": r"\^{}",
    "~": r"\~{}",
}


def latex_escape(text: str) -> str:
    return "".join(_LATEX_SPECIAL.get(c, c) for c in text)


def by_frequency(motifs):
    return sorted(motifs, key=lambda sm: (-sm.frequency, -sm.log_factor, sm.pattern.edges))


def write_motif_csv(path, motifs, dictionary=None, prefixes=None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for sm in motifs:
            writer.writerow(sm.csv_row(dictionary, prefixes))


def latex_rows(motifs, dictionary=None, prefixes=None) -> str:
    """Body rows for a ``longtable{ r r p{10cm} }`` with columns log factor,
    frequency, pattern (one triple per line)."""
    lines = []
    for sm in motifs:
        triples = print_pattern(sm.pattern, dictionary, prefixes, sep="\n").split("\n")
        cell = r" \newline ".join(r"\texttt{" + latex_escape(t.rstrip(" .")) + ".}" for t in triples)
        lines.append(f"{sm.log_factor:.1f} & {sm.frequency} & {cell} \\\\")
    return "\n".join(lines) + ("\n" if lines else "")


def write_latex(path, motifs, dictionary=None, prefixes=None):
    Path(path).write_text(latex_rows(motifs, dictionary, prefixes), encoding="utf-8")


def _jsonable(obj):
    if is_dataclass(obj):
        return {k: _jsonable(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and obj == float("inf"):
        return "inf"
    return obj


@dataclass
class RunManifest:
    command: str
    argv: list
    input: str | None = None
    synth_spec: dict | None = None
    search_config: object = None
    pitman_yor: object = None
    seed: int | None = None
    version: str = ""
    outputs: list = field(default_factory=list)

    def write(self, path):
        Path(path).write_text(json.dumps(_jsonable(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def count_positive(motifs: list[ScoredMotif]) -> int:
    return sum(1 for sm in motifs if sm.log_factor > 0)
