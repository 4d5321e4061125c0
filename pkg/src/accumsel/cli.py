"""Command-line entry point: ``accumsel {synth,prefilter,select,experiment,oracle}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from accumsel.dataset import DataError, SyntheticSpec, generate_synthetic, load_csv, write_csv
from accumsel.harness import build_config, parse_config_text, run_experiment, write_report
from accumsel.inducers import DEFAULT_LDA_GAMMA, INDUCERS, InducerKind, SubsetScorer
from accumsel.mask import FeatureMask
from accumsel.prefilter import bss_wss_rank, select_top_k
from accumsel.relevance import ACCUMULATION_MODES, DEFAULT_ORACLE_GUARD, PER_SUBSET, Weighting, exact_relevance
from accumsel.search import ALGORITHMS, DEFAULT_LAMBDA, SearchConfig, run_search

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
WEIGHTINGS = [w.value for w in Weighting]


class UsageError(Exception):
    pass


def _unit_interval(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"lambda must lie in the range [0, 1], got {value}")
    return value


def _non_negative(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="accumsel", description=__doc__.splitlines()[0])
    p.add_argument("--verbose", "-v", action="store_true", help="log one line per search step")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic dataset with planted informative features")
    s.add_argument("--n-samples", type=_positive_int, default=100)
    s.add_argument("--n-informative", type=int, default=3)
    s.add_argument("--n-noise", type=int, default=17)
    s.add_argument("--separation", type=_non_negative, default=2.0, help="class mean shift of informative features")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output CSV path")

    f = sub.add_parser("prefilter", help="keep the top-k features by BSS/WSS ratio")
    f.add_argument("--data", required=True)
    f.add_argument("--label-column", default="-1", help="label column name or index (default: last)")
    f.add_argument("--k", type=_positive_int, required=True)
    f.add_argument("--out", required=True, help="reduced CSV path")
    f.add_argument("--map-out", help="new_index,original_name map (default: <out>.map.csv)")

    sel = sub.add_parser("select", help="run one wrapper search on a dataset")
    sel.add_argument("--data", required=True)
    sel.add_argument("--label-column", default="-1")
    _add_inducer_flags(sel)
    sel.add_argument("--algo", choices=ALGORITHMS, default="sbg+")
    _add_search_flags(sel)
    sel.add_argument("--seed", type=int, default=0, help="inner 5x2cv seed")
    sel.add_argument("--trace", help="write the evaluation trace CSV here")

    e = sub.add_parser("experiment", help="paired outer-5x2cv comparison of plain vs accumulated search")
    e.add_argument("--config", help="flat key = value config file; flags override it")
    e.add_argument("--data")
    e.add_argument("--label-column")
    e.add_argument("--n-samples", type=_positive_int)
    e.add_argument("--n-informative", type=int)
    e.add_argument("--n-noise", type=int)
    e.add_argument("--separation", type=_non_negative)
    e.add_argument("--synth-seed", type=int)
    e.add_argument("--inducer", choices=INDUCERS)
    e.add_argument("--lda-gamma", type=_non_negative)
    e.add_argument("--direction", choices=("backward", "forward"))
    e.add_argument("--prefilter-k", type=_positive_int)
    e.add_argument("--global-prefilter", action="store_true", default=None,
                   help="rank genes once on all rows (leaks test rows; reproduces the original protocol)")
    e.add_argument("--lambda", dest="lam", type=_unit_interval)
    e.add_argument("--weighting", choices=WEIGHTINGS)
    e.add_argument("--accumulation", choices=ACCUMULATION_MODES)
    e.add_argument("--outer-seed", type=int)
    e.add_argument("--inner-seed", type=int)
    e.add_argument("--threads", type=_positive_int)
    e.add_argument("--out", required=True, help="report CSV path")

    o = sub.add_parser("oracle", help="exact exhaustive relevance for small feature counts")
    src = o.add_mutually_exclusive_group(required=True)
    src.add_argument("--table", help="truth table file, one 'bitstring,score' line per subset")
    src.add_argument("--data", help="dataset CSV scored with --inducer")
    o.add_argument("--label-column", default="-1")
    _add_inducer_flags(o)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--weighting", choices=WEIGHTINGS, default="unit")
    o.add_argument("--n-guard", type=_positive_int, default=DEFAULT_ORACLE_GUARD)
    return p


def _add_inducer_flags(p):
    p.add_argument("--inducer", choices=INDUCERS, default="1nn")
    p.add_argument("--lda-gamma", type=_non_negative, default=DEFAULT_LDA_GAMMA)


def _add_search_flags(p):
    p.add_argument("--lambda", dest="lam", type=_unit_interval, default=DEFAULT_LAMBDA,
                   help="evidence weight in [0, 1] (default 2/3)")
    p.add_argument("--weighting", choices=WEIGHTINGS, default="unit")
    p.add_argument("--accumulation", choices=ACCUMULATION_MODES, default=PER_SUBSET)


def cmd_synth(args) -> int:
    spec = SyntheticSpec(args.n_samples, args.n_informative, args.n_noise, args.separation, args.seed)
    ds = generate_synthetic(spec)
    write_csv(ds, args.out)
    print(f"wrote {ds.n_samples} samples x {ds.n_features} features to {args.out}")
    return EXIT_OK


def cmd_prefilter(args) -> int:
    ds = load_csv(args.data, args.label_column)
    if args.k > ds.n_features:
        raise UsageError(f"--k {args.k} exceeds the {ds.n_features} features in {args.data}")
    reduced, index_map = select_top_k(ds, bss_wss_rank(ds), args.k)
    write_csv(reduced, args.out)
    map_path = args.map_out or f"{args.out}.map.csv"
    with open(map_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["new_index", "original_name"])
        for new, old in enumerate(index_map):
            w.writerow([new, ds.feature_names[old]])
    print(f"kept {args.k} of {ds.n_features} features; map written to {map_path}")
    return EXIT_OK


def cmd_select(args) -> int:
    ds = load_csv(args.data, args.label_column)
    config = SearchConfig(args.algo, args.lam, args.weighting, args.accumulation)
    scorer = SubsetScorer(InducerKind(args.inducer, args.lda_gamma), inner_seed=args.seed)
    result = run_search(scorer, ds, config)
    if args.trace:
        result.trace.write_csv(args.trace)
    names = [ds.feature_names[j] for j in result.best_mask]
    print(f"best subset ({len(names)} features): {' '.join(names)}")
    print(f"inner accuracy: {100 * result.best_score:.1f}% (error {100 * (1 - result.best_score):.1f}%)")
    print(f"scorer calls: {result.trace.call_count}")
    return EXIT_OK


def read_truth_table(path) -> tuple[int, np.ndarray]:
    """Parse ``bitstring,score`` lines; every subset must appear exactly once."""
    entries: dict[int, float] = {}
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                bits, score = line.split(",")
                mask = FeatureMask.from_bitstring(bits)
                value = float(score)
            except ValueError:
                raise UsageError(f"{path}: line {lineno}: expected 'bitstring,score', got {line!r}") from None
            if width is None:
                width = mask.width
            elif mask.width != width:
                raise UsageError(f"{path}: line {lineno}: bitstring width {mask.width} != {width}")
            if mask.bits in entries:
                raise UsageError(f"{path}: line {lineno}: duplicate subset {bits.strip()}")
            entries[mask.bits] = value
    if width is None or width < 1:
        raise UsageError(f"{path}: no subsets listed")
    for b in range(1 << width):
        if b not in entries:
            raise UsageError(f"{path}: missing subset {FeatureMask(width, b).bitstring()}")
    return width, np.array([entries[b] for b in range(1 << width)])


def cmd_oracle(args) -> int:
    if args.table:
        n, table = read_truth_table(args.table)
        if n > args.n_guard:
            raise UsageError(f"{n} features exceeds --n-guard {args.n_guard}")
        names = [f"f{j}" for j in range(n)]
        result = exact_relevance(table, n, args.weighting, guard=args.n_guard)
    else:
        ds = load_csv(args.data, args.label_column)
        n = ds.n_features
        if n > args.n_guard:
            raise UsageError(f"{n} features exceeds --n-guard {args.n_guard}")
        scorer = SubsetScorer(InducerKind(args.inducer, args.lda_gamma), inner_seed=args.seed)
        names = list(ds.feature_names)
        result = exact_relevance(lambda m: scorer.score(ds, m), n, args.weighting, guard=args.n_guard)
    print("feature\tL+\tL-\tR\tR_w")
    for j, name in enumerate(names):
        print(f"{name}\t{result.l_plus[j]:.12g}\t{result.l_minus[j]:.12g}\t"
              f"{result.r[j]:.12g}\t{result.r_weighted[j]:.12g}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    file_values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            file_values = parse_config_text(fh.read())
    synth = {k: v for k, v in {
        "n_samples": args.n_samples, "n_informative": args.n_informative, "n_noise": args.n_noise,
        "class_separation": args.separation, "seed": args.synth_seed}.items() if v is not None}
    overrides = {
        "data": args.data, "label_column": args.label_column, "inducer": args.inducer,
        "lda_gamma": args.lda_gamma, "direction": args.direction, "prefilter_k": args.prefilter_k,
        "global_prefilter": args.global_prefilter, "lam": args.lam, "weighting": args.weighting,
        "accumulation_mode": args.accumulation, "outer_seed": args.outer_seed,
        "inner_seed": args.inner_seed, "threads": args.threads, "synthetic": synth,
    }
    try:
        cfg = build_config(file_values, overrides)
    except TypeError as exc:
        raise UsageError(f"incomplete synthetic spec: {exc}") from None
    report = run_experiment(cfg)
    write_report(report, args.out)
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "prefilter": cmd_prefilter,
    "select": cmd_select,
    "experiment": cmd_experiment,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, DataError) as exc:
        print(f"accumsel {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"accumsel {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        print(f"accumsel {args.command}: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
