"""Paired outer-5x2cv experiment comparing a plain search with its
accumulated counterpart on identical training halves."""

from __future__ import annotations

import configparser
import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Callable, Optional

import numpy as np

from accumsel.dataset import (
    DataError,
    Dataset,
    SyntheticSpec,
    derive_seeds,
    generate_synthetic,
    load_csv,
    make_5x2_plan,
)
from accumsel.inducers import InducerKind, SingularCovarianceError, SubsetScorer, DEFAULT_LDA_GAMMA
from accumsel.mask import FeatureMask
from accumsel.prefilter import bss_wss_rank, select_top_k
from accumsel.relevance import ACCUMULATION_MODES, PER_SUBSET, Weighting
from accumsel.search import DEFAULT_LAMBDA, SearchConfig, run_search

log = logging.getLogger(__name__)

REPORT_HEADER = ("fold", "repetition", "orientation", "algorithm", "test_error", "subset_size",
                 "subset_members", "warning")
AGGREGATE_MARKER = "# aggregate"

# observer(phase, fold, dataset) sees every dataset handed to prefilter, search or refit
Observer = Callable[[str, int, Dataset], None]


@dataclass
class ExperimentConfig:
    data: Optional[str] = None
    label_column: str = "-1"
    synthetic: Optional[SyntheticSpec] = None
    inducer: str = "1nn"
    lda_gamma: float = DEFAULT_LDA_GAMMA
    prefilter_k: Optional[int] = None
    global_prefilter: bool = False
    lam: float = DEFAULT_LAMBDA
    weighting: str = "unit"
    accumulation_mode: str = PER_SUBSET
    outer_seed: int = 0
    inner_seed: int = 0
    direction: str = "backward"
    threads: int = 1

    def validate(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise DataError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.direction not in ("backward", "forward"):
            raise DataError(f"direction must be 'backward' or 'forward', got {self.direction!r}")
        if self.accumulation_mode not in ACCUMULATION_MODES:
            raise DataError(f"unknown accumulation mode {self.accumulation_mode!r}")
        Weighting(self.weighting)
        InducerKind(self.inducer, self.lda_gamma)
        if self.prefilter_k is not None and self.prefilter_k < 1:
            raise DataError("prefilter_k must be positive")
        if (self.data is None) == (self.synthetic is None):
            raise DataError("give exactly one of a data file or a synthetic spec")
        if self.threads < 1:
            raise DataError("threads must be >= 1")

    @property
    def algorithms(self) -> tuple[str, str]:
        return ("sbg", "sbg+") if self.direction == "backward" else ("sfg", "sfg+")

    def load(self) -> Dataset:
        if self.synthetic is not None:
            return generate_synthetic(self.synthetic)
        return load_csv(self.data, self.label_column)


_SYNTH_KEYS = {"n_samples": int, "n_informative": int, "n_noise": int, "class_separation": float, "seed": int}
_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines into typed ExperimentConfig fields.

    Keys ``n_samples``, ``n_informative``, ``n_noise``, ``class_separation``
    and ``seed`` build a synthetic spec. ``lambda`` is accepted for ``lam``.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    cp.read_string("[experiment]\n" + text)
    raw = dict(cp["experiment"])
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    out: dict = {}
    synth: dict = {}
    for key, value in raw.items():
        key = "lam" if key == "lambda" else key.replace("-", "_")
        if key in _SYNTH_KEYS:
            synth[key] = _SYNTH_KEYS[key](value)
        elif key in types:
            out[key] = _coerce(key, value)
        else:
            raise DataError(f"unknown config key {key!r}")
    if synth:
        out["synthetic"] = synth
    return out


def _coerce(key: str, value: str):
    if key in ("lda_gamma", "lam"):
        return float(value)
    if key in ("outer_seed", "inner_seed", "threads"):
        return int(value)
    if key == "prefilter_k":
        return None if value.lower() in ("", "none") else int(value)
    if key == "global_prefilter":
        if value.lower() not in _BOOL:
            raise DataError(f"{key}: not a boolean: {value!r}")
        return _BOOL[value.lower()]
    return value


def build_config(file_values: dict, overrides: dict) -> ExperimentConfig:
    """Merge config-file values with CLI overrides (overrides win)."""
    merged = dict(file_values)
    synth = dict(merged.pop("synthetic", {}) or {})
    synth.update(overrides.pop("synthetic", {}) or {})
    merged.update({k: v for k, v in overrides.items() if v is not None})
    if synth and merged.get("data") is None:
        merged["synthetic"] = SyntheticSpec(**synth)
    cfg = ExperimentConfig(**merged)
    cfg.validate()
    return cfg


@dataclass(frozen=True)
class FoldResult:
    fold: int
    repetition: int
    orientation: int
    algorithm: str
    test_error: float
    subset_size: int
    subset_members: tuple[str, ...]
    warning: str = ""
    inner_score: float = float("nan")
    call_count: int = 0


@dataclass
class ExperimentReport:
    algorithms: tuple[str, str]
    rows: list[FoldResult] = field(default_factory=list)

    def for_algorithm(self, algorithm: str) -> list[FoldResult]:
        return sorted((r for r in self.rows if r.algorithm == algorithm), key=lambda r: r.fold)

    def mean_error(self, algorithm: str) -> float:
        return float(np.mean([r.test_error for r in self.for_algorithm(algorithm)]))

    def mean_size(self, algorithm: str) -> float:
        return float(np.mean([r.subset_size for r in self.for_algorithm(algorithm)]))

    def paired_differences(self) -> list[tuple[int, float, int]]:
        """Per fold ``(fold, error_plus - error_plain, size_plus - size_plain)``."""
        plain, plus = self.algorithms
        out = []
        for a, b in zip(self.for_algorithm(plain), self.for_algorithm(plus)):
            out.append((a.fold, b.test_error - a.test_error, b.subset_size - a.subset_size))
        return out

    def summary(self) -> str:
        lines = [f"{'algorithm':<10}{'error (%)':>12}{'size':>10}"]
        for alg in reversed(self.algorithms):
            lines.append(f"{alg.upper():<10}{100 * self.mean_error(alg):>12.1f}{self.mean_size(alg):>10.1f}")
        return "\n".join(lines)


def _prefilter(train: Dataset, k: Optional[int]) -> tuple[Dataset, np.ndarray]:
    if k is None:
        return train, np.arange(train.n_features)
    return select_top_k(train, bss_wss_rank(train), min(k, train.n_features))


def _run_fold(cfg: ExperimentConfig, data: Dataset, fold_info, inner_seed: int,
              observer: Optional[Observer]) -> list[FoldResult]:
    fold, rep, orient, train_rows, test_rows = fold_info
    inducer = InducerKind(cfg.inducer, cfg.lda_gamma)
    train = data.take_rows(train_rows)
    test = data.take_rows(test_rows)

    if cfg.global_prefilter:
        columns = np.arange(train.n_features)
        reduced = train
    else:
        if observer and cfg.prefilter_k is not None:
            observer("prefilter", fold, train)
        reduced, columns = _prefilter(train, cfg.prefilter_k)

    scorer = SubsetScorer(inducer, inner_seed)
    search_scorer = _ObservedScorer(scorer, observer, fold) if observer else scorer
    results = []
    for algorithm in cfg.algorithms:
        search_cfg = SearchConfig(algorithm, cfg.lam, cfg.weighting, cfg.accumulation_mode)
        sel = run_search(search_scorer, reduced, search_cfg)
        mask = FeatureMask.from_indices(data.n_features, columns[sel.best_mask.indices()])
        if observer:
            observer("refit-train", fold, train)
            observer("refit-test", fold, test)
        warning = ""
        try:
            pred = inducer.fit_predict(train.values, train.labels, mask, test.values)
            error = float(np.mean(pred != test.labels))
        except SingularCovarianceError as exc:
            error, warning = 1.0, f"singular: {exc}"
            log.warning("fold %d %s: final refit failed (%s)", fold, algorithm, exc)
        members = tuple(data.feature_names[j] for j in mask)
        results.append(FoldResult(fold, rep, orient, algorithm, error, len(mask), members, warning,
                                  sel.best_score, sel.trace.call_count))
        log.info("fold %d %s: error %.3f size %d", fold, algorithm, error, len(mask))
    return results


class _ObservedScorer:
    def __init__(self, scorer, observer: Observer, fold: int):
        self.scorer = scorer
        self.observer = observer
        self.fold = fold

    def score(self, dataset, mask, counter=None):
        self.observer("search", self.fold, dataset)
        return self.scorer.score(dataset, mask, counter)


def run_experiment(cfg: ExperimentConfig, observer: Optional[Observer] = None,
                   dataset: Optional[Dataset] = None) -> ExperimentReport:
    """Outer stratified 5x2cv; both algorithms search each training half.

    Each outer fold gets its own inner scorer seed derived from
    ``inner_seed``; the two algorithms of a fold share that scorer.
    """
    cfg.validate()
    data = dataset if dataset is not None else cfg.load()
    if cfg.prefilter_k is not None and cfg.prefilter_k > data.n_features:
        raise DataError(f"prefilter_k={cfg.prefilter_k} exceeds {data.n_features} features")
    if cfg.global_prefilter and cfg.prefilter_k is not None:
        if observer:
            observer("prefilter", -1, data)
        data, _ = _prefilter(data, cfg.prefilter_k)

    plan = make_5x2_plan(data, cfg.outer_seed)
    folds = list(plan.orientations())
    seeds = derive_seeds(cfg.inner_seed, len(folds))
    work = lambda i: _run_fold(cfg, data, folds[i], seeds[i], observer)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(work, range(len(folds))))
    else:
        chunks = [work(i) for i in range(len(folds))]
    report = ExperimentReport(cfg.algorithms)
    for chunk in chunks:
        report.rows.extend(chunk)
    return report


def write_report(report: ExperimentReport, path, echo: bool = True) -> None:
    """Per-fold CSV rows followed by an aggregate block; prints the summary."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for alg in report.algorithms:
            for r in report.for_algorithm(alg):
                w.writerow([r.fold, r.repetition, r.orientation, r.algorithm, repr(r.test_error),
                            r.subset_size, ";".join(r.subset_members), r.warning])
        w.writerow([AGGREGATE_MARKER])
        w.writerow(["algorithm", "mean_test_error", "mean_subset_size"])
        for alg in report.algorithms:
            w.writerow([alg, repr(report.mean_error(alg)), repr(report.mean_size(alg))])
        w.writerow(["fold", "error_difference", "size_difference"])
        for fold, de, ds in report.paired_differences():
            w.writerow([fold, repr(de), ds])
    if echo:
        print(report.summary())


def read_report(path) -> ExperimentReport:
    """Parse the per-fold block of a report written by :func:`write_report`."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != REPORT_HEADER:
        raise DataError(f"{path}: not a report file")
    results = []
    for row in rows[1:]:
        if row and row[0] == AGGREGATE_MARKER:
            break
        fold, rep, orient, alg, err, size, members, warning = row
        results.append(FoldResult(int(fold), int(rep), int(orient), alg, float(err), int(size),
                                  tuple(members.split(";")) if members else (), warning))
    algs = tuple(dict.fromkeys(r.algorithm for r in results))
    return ExperimentReport(algs, results)

