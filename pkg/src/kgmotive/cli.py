"""Command-line interface: mine, score, match and the synthetic experiments.

Exit codes: 0 success, 2 input error, 3 pattern error, 4 internal contract
violation.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from pathlib import Path

from kgmotive import __version__
from kgmotive.codes import PitmanYorConfig
from kgmotive.errors import ContractViolation, KGMotiveError, NTriplesError, PatternError
from kgmotive.graph import Dictionary, load_ntriples, read_edgelist, write_edgelist, write_ntriples
from kgmotive.matcher import MatchBudget, find_instances, prune_overlap
from kgmotive.motifcode import CSV_HEADER, log_factor
from kgmotive.pattern import DEFAULT_PREFIXES, abbreviate, canonicalize, load_prefixes, parse_pattern, print_pattern
from kgmotive.report import RunManifest, by_frequency, count_positive, write_latex, write_motif_csv
from kgmotive.search import SearchConfig, run_search
from kgmotive.synth import INJECTION_CSV_HEADER, MUTAG_DIMS, SynthSpec, run_injection_experiment, run_single_experiment, sample_er_kg

EXIT_OK, EXIT_INPUT, EXIT_PATTERN, EXIT_CONTRACT = 0, 2, 3, 4


class InputError(KGMotiveError):
    pass


def load_graph(path, fmt="auto"):
    path = Path(path)
    if fmt == "auto":
        fmt = "nt" if path.suffix.lower() in (".nt", ".ntriples") else "edgelist"
    try:
        with open(path, encoding="utf-8") as fh:
            if fmt == "nt":
                return load_ntriples(fh)
            G = read_edgelist(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}")
    return G, Dictionary.synthetic(G.v, G.r)


def _budget(args) -> MatchBudget:
    timeout = args.match_timeout
    if timeout is None:
        timeout = None if args.max_matches is not None else 5.0
    elif timeout <= 0:
        timeout = None
    max_steps = args.max_steps
    if timeout is None and args.max_matches is None and max_steps is None:
        return MatchBudget.unlimited()
    return MatchBudget(timeout, args.max_matches, max_steps)


def _py(args) -> PitmanYorConfig:
    return PitmanYorConfig(args.py_alpha, args.py_d)


def _prefixes(args):
    return load_prefixes(args.prefixes) if args.prefixes else dict(DEFAULT_PREFIXES)


def _search_config(args, budget) -> SearchConfig:
    return SearchConfig(
        iterations=args.iters,
        workers=args.workers,
        accept_prob=args.alpha,
        per_pattern_budget=budget,
        top_per_worker=args.top_per_worker,
        rng_seed=args.seed,
        progress_every=args.progress,
    )


def _pool_size(args):
    env = os.environ.get("KGMOTIVE_THREADS")
    if env:
        return max(1, int(env))
    return args.processes


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_mine(args) -> int:
    G, d = load_graph(args.input, args.format)
    prefixes = _prefixes(args)
    budget = _budget(args)
    cfg = _search_config(args, budget)
    py = _py(args)
    results = run_search(G, cfg, py, _pool_size(args))
    out = _out_dir(args)
    outputs = ["motifs-byscore.csv", "motifs-byfreq.csv"]
    byscore = results[: args.top]
    byfreq = by_frequency(results)[: args.top]
    write_motif_csv(out / "motifs-byscore.csv", byscore, d, prefixes)
    write_motif_csv(out / "motifs-byfreq.csv", byfreq, d, prefixes)
    if args.latex:
        write_latex(out / "motifs-byscore.latex", byscore, d, prefixes)
        write_latex(out / "motifs-byfreq.latex", byfreq, d, prefixes)
        outputs += ["motifs-byscore.latex", "motifs-byfreq.latex"]
    RunManifest(
        "mine", args.argv, input=str(args.input), search_config=cfg, pitman_yor=py, seed=args.seed,
        version=__version__, outputs=outputs,
    ).write(out / "manifest.json")
    print(f"{count_positive(results)} motifs with positive log-factor (of {len(results)} patterns scored)")
    return EXIT_OK


def cmd_score(args) -> int:
    G, d = load_graph(args.input, args.format)
    prefixes = _prefixes(args)
    M = parse_pattern(args.pattern, d, prefixes)
    sm = log_factor(G, M, _budget(args), _py(args))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(CSV_HEADER + ["complete", "significant"])
    writer.writerow(sm.csv_row(d, prefixes) + [int(sm.complete), int(sm.significant)])
    return EXIT_OK


def cmd_match(args) -> int:
    G, d = load_graph(args.input, args.format)
    prefixes = _prefixes(args)
    M = parse_pattern(args.pattern, d, prefixes)
    result = find_instances(G, M, _budget(args))
    instances = prune_overlap(result.instances, M) if args.pruned else result.instances
    header = [f"?n{i + 1}" for i in range(M.n_node_vars)] + [f"?p{-x}" for x in M.rel_var_labels]
    writer = csv.writer(sys.stdout, delimiter="\t", lineterminator="\n")
    writer.writerow(header)
    for inst in instances:
        writer.writerow(
            [abbreviate(d.node(x), prefixes) for x in inst.nodes]
            + [abbreviate(d.relation(x), prefixes) for x in inst.relations]
        )
    print(f"{len(instances)} instances, complete={result.complete}", file=sys.stderr)
    return EXIT_OK


def _dims(args):
    spec = SynthSpec(args.n, args.m, args.r)
    return spec.n, spec.m, spec.r


def cmd_synth_single(args) -> int:
    dims = _dims(args)
    budget = _budget(args)
    cfg = _search_config(args, budget)
    py = _py(args)
    pattern = None
    if args.pattern:
        pattern = parse_pattern(args.pattern, Dictionary.synthetic(dims[0], dims[2]))
    compare_k = [int(x) for x in args.compare_k.split(",") if x.strip()]
    res = run_single_experiment(dims, args.k, cfg, args.seed, compare_k, args.top, pattern, py, _pool_size(args))
    d = Dictionary.synthetic(dims[0], dims[2])
    out = _out_dir(args)
    header = ["rank", "log_factor", "frequency", "pattern", "planted"]
    for kc in compare_k:
        header += [f"log_factor_k{kc}", f"frequency_k{kc}"]
    planted = canonicalize(res.planted)
    with open(out / "single.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, sm in enumerate(res.motifs):
            row = [i + 1, f"{sm.log_factor:.4f}", sm.frequency, print_pattern(sm.pattern, d), int(sm.pattern == planted)]
            for kc in compare_k:
                c = res.comparisons[kc][i]
                row += [f"{c.log_factor:.4f}", c.frequency]
            writer.writerow(row)
    RunManifest(
        "synth single", args.argv, synth_spec={"n": dims[0], "m": dims[1], "r": dims[2], "k": args.k,
                                                  "compare_k": compare_k, "planted": print_pattern(planted, d)},
        search_config=cfg, pitman_yor=py, seed=args.seed, version=__version__, outputs=["single.csv"],
    ).write(out / "manifest.json")
    ranks = [i + 1 for i, sm in enumerate(res.motifs) if sm.pattern == planted]
    print(f"planted: {print_pattern(planted, d)}")
    print(f"{count_positive(res.motifs)} of the top {len(res.motifs)} have positive log-factor; "
          f"planted pattern rank: {ranks[0] if ranks else 'not found'}")
    return EXIT_OK


def cmd_synth_repeat(args) -> int:
    dims = _dims(args)
    if args.k_values:
        k_values = [int(x) for x in args.k_values.split(",") if x.strip()]
    else:
        k_values = list(range(0, args.kmax + 1, args.kstep))
    budget = _budget(args)
    py = _py(args)
    rows = run_injection_experiment(dims, k_values, args.repeats, args.seed, budget, py)
    out = _out_dir(args)
    with open(out / "repeat.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(INJECTION_CSV_HEADER)
        for row in rows:
            writer.writerow([row.k, row.repeat, row.frequency, f"{row.log_factor:.4f}"])
    RunManifest(
        "synth repeat", args.argv,
        synth_spec={"n": dims[0], "m": dims[1], "r": dims[2], "k_values": k_values, "repeats": args.repeats,
                    "incomplete_matches": sum(1 for r in rows if not r.complete)},
        search_config={"per_pattern_budget": budget}, pitman_yor=py, seed=args.seed, version=__version__, outputs=["repeat.csv"],
    ).write(out / "manifest.json")
    print(f"{len(rows)} rows written to {out / 'repeat.csv'}")
    return EXIT_OK


def cmd_synth_graph(args) -> int:
    dims = _dims(args)
    G = sample_er_kg(SynthSpec(*dims, rng_seed=args.seed))
    path = Path(args.output)
    with open(path, "w", encoding="utf-8") as fh:
        if path.suffix.lower() in (".nt", ".ntriples"):
            write_ntriples(G, Dictionary.synthetic(G.v, G.r), fh)
        else:
            write_edgelist(G, fh)
    print(f"wrote {G} to {path}")
    return EXIT_OK


def _add_budget_flags(p):
    p.add_argument("--match-timeout", type=float, default=None,
                   help="seconds per instance search (default 5; 0 disables; off by default when --max-matches is set)")
    p.add_argument("--max-matches", type=int, default=None, help="instance-count cap per search (reproducible runs)")
    p.add_argument("--max-steps", type=int, default=None, help="cap on candidate triples examined per search")


def _add_py_flags(p):
    p.add_argument("--py-alpha", type=float, default=0.5, help="Pitman-Yor concentration")
    p.add_argument("--py-d", type=float, default=0.1, help="Pitman-Yor discount")


def _add_search_flags(p, iters, workers):
    p.add_argument("--workers", type=int, default=workers, help="number of independent search chains")
    p.add_argument("--processes", type=int, default=None,
                   help="parallel processes (default min(workers, cpus); KGMOTIVE_THREADS overrides)")
    p.add_argument("--iters", type=int, default=iters, help="iterations per chain")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.5, help="probability of accepting a worse pattern")
    p.add_argument("--top-per-worker", type=int, default=1000)
    p.add_argument("--progress", type=int, default=0, metavar="N",
                   help="print 'worker,iter,best_logfactor' to stderr every N iterations")


def _add_input_flags(p):
    p.add_argument("input", help="N-Triples file (.nt) or integer edge list")
    p.add_argument("--format", choices=("auto", "nt", "edgelist"), default="auto")
    p.add_argument("--prefixes", help="prefix table file for printing and parsing terms")


def _add_dims(p, dims=MUTAG_DIMS):
    p.add_argument("--n", type=int, default=dims[0])
    p.add_argument("--m", type=int, default=dims[1])
    p.add_argument("--r", type=int, default=dims[2])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgmotive", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kgmotive {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="search for motifs and write ranked tables")
    _add_input_flags(p)
    _add_search_flags(p, iters=3125, workers=32)
    _add_budget_flags(p)
    _add_py_flags(p)
    p.add_argument("--top", type=int, default=100, help="rows per output table")
    p.add_argument("--latex", action="store_true", help="also write longtable row fragments")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("score", help="log-factor of one pattern")
    _add_input_flags(p)
    p.add_argument("pattern")
    _add_budget_flags(p)
    _add_py_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("match", help="list instances of one pattern")
    _add_input_flags(p)
    p.add_argument("pattern")
    p.add_argument("--pruned", action="store_true", help="drop instances overlapping earlier ones")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_match)

    synth = sub.add_parser("synth", help="random-graph experiments").add_subparsers(dest="synth_command", required=True)

    p = synth.add_parser("single", help="plant one pattern, search, rescore on other k")
    _add_dims(p)
    p.add_argument("--k", type=int, default=75)
    p.add_argument("--compare-k", default="0,150")
    p.add_argument("--pattern", help="pattern to plant (constants as n:<i> / r:<i>); random if omitted")
    p.add_argument("--top", type=int, default=10)
    _add_search_flags(p, iters=100000, workers=1)
    _add_budget_flags(p)
    _add_py_flags(p)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_synth_single)

    p = synth.add_parser("repeat", help="k-sweep of directly scored planted patterns")
    _add_dims(p)
    p.add_argument("--kmax", type=int, default=200)
    p.add_argument("--kstep", type=int, default=10)
    p.add_argument("--k-values", help="comma-separated k list (overrides --kmax/--kstep)")
    p.add_argument("--repeats", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    _add_budget_flags(p)
    _add_py_flags(p)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_synth_repeat)

    p = synth.add_parser("graph", help="write a random knowledge graph")
    _add_dims(p, (2000, 8000, 12))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("output", help="destination (.nt for N-Triples, anything else for an edge list)")
    p.set_defaults(func=cmd_synth_graph)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    started = time.monotonic()
    try:
        status = args.func(args)
        if args.command in ("mine", "synth"):
            print(f"elapsed {time.monotonic() - started:.1f}s", file=sys.stderr)
        return status
    except ContractViolation as e:
        print(f"error: contract violation: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    except PatternError as e:
        print(f"error: pattern: {e}", file=sys.stderr)
        return EXIT_PATTERN
    except (NTriplesError, InputError, KGMotiveError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
