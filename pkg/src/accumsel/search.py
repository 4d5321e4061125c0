"""Sequential backward / forward wrapper search, plain and accumulated."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

from accumsel.dataset import DataError
from accumsel.mask import FeatureMask
from accumsel.relevance import (
    ACCUMULATION_MODES,
    LITERAL_ALG2,
    PER_SUBSET,
    AccumulatorTable,
    Weighting,
    accumulate,
    accumulate_step,
    estimated_relevance,
)

log = logging.getLogger(__name__)

ALGORITHMS = ("sbg", "sbg+", "sfg", "sfg+")
DEFAULT_LAMBDA = 2 / 3
TRACE_HEADER = ("step", "candidate_feature", "mask_bitstring", "score", "chosen_flag")


class SearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    algorithm: str = "sbg+"
    lam: float = DEFAULT_LAMBDA
    weighting: Weighting = Weighting.UNIT
    accumulation_mode: str = PER_SUBSET

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise DataError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if not 0.0 <= self.lam <= 1.0:
            raise DataError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.accumulation_mode not in ACCUMULATION_MODES:
            raise DataError(f"unknown accumulation mode {self.accumulation_mode!r}")
        object.__setattr__(self, "weighting", Weighting(self.weighting))
        if self.accumulation_mode == LITERAL_ALG2 and self.weighting is not Weighting.UNIT:
            raise DataError("literal_alg2 accumulation only supports unit weighting")

    @property
    def backward(self) -> bool:
        return self.algorithm.startswith("sb")

    @property
    def accumulated(self) -> bool:
        return self.algorithm.endswith("+")


@dataclass(frozen=True)
class Evaluation:
    candidate: int
    mask: FeatureMask
    score: float


@dataclass(frozen=True)
class StepRecord:
    index: int
    pre_mask: FeatureMask
    evaluations: tuple[Evaluation, ...]
    criteria: tuple[float, ...]
    chosen: int
    post_mask: FeatureMask
    post_score: float  # NaN for the unscored final backward step


@dataclass(frozen=True)
class SearchTrace:
    """Every scored subset of one run.

    Backward runs score the full set once before the first step (trace row
    with step 0 and candidate -1) and do not score the empty set reached by
    the last, forced removal.
    """

    initial: Evaluation | None
    steps: tuple[StepRecord, ...]
    call_count: int

    def rows(self):
        if self.initial is not None:
            yield (0, -1, self.initial.mask.bitstring(), repr(self.initial.score), 0)
        for step in self.steps:
            for ev in step.evaluations:
                yield (step.index, ev.candidate, ev.mask.bitstring(), repr(ev.score),
                       int(ev.candidate == step.chosen))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            w.writerows(self.rows())

    def scored_path(self) -> list[tuple[FeatureMask, float]]:
        """The visited non-empty subsets with their scores, in visiting order."""
        path = [(self.initial.mask, self.initial.score)] if self.initial is not None else []
        path += [(s.post_mask, s.post_score) for s in self.steps if len(s.post_mask) and not math.isnan(s.post_score)]
        return path


@dataclass(frozen=True)
class SelectionResult:
    best_mask: FeatureMask
    best_score: float
    trace: SearchTrace


def best_of_trace(path: list[tuple[FeatureMask, float]]) -> tuple[FeatureMask, float]:
    """Highest-scoring subset on the path; ties go to the smaller one."""
    best = None
    for m, s in path:
        if best is None or s > best[1] or (s == best[1] and len(m) < len(best[0])):
            best = (m, s)
    return best


def run_search(scorer, dataset, config: SearchConfig) -> SelectionResult:
    """Run one unstopped sequential search and return the best subset seen.

    Every step scores all one-feature moves from the current subset. Plain
    variants take the move with the best score. Accumulated variants first
    fold the step's scores into the evidence table and then take the move
    maximizing the mixed criterion; ties go to the lowest feature index.
    Either way exactly n(n+1)/2 subsets are scored.
    """
    n = dataset.n_features
    if n < 1:
        raise DataError("dataset has no features")
    backward = config.backward
    table = AccumulatorTable.zeros(n) if config.accumulated else None
    literal = config.accumulation_mode == LITERAL_ALG2
    # literal mode rates keeping x; otherwise rate the move itself
    toward = "add" if (literal or not backward) else "remove"
    calls = 0

    def evaluate(k, mask):
        nonlocal calls
        try:
            score = float(scorer.score(dataset, mask))
        except Exception as exc:
            raise SearchError(f"step {k}: scoring subset {mask.bitstring()} failed: {exc}") from exc
        calls += 1
        return score

    initial = None
    if backward:
        current = FeatureMask.full(n)
        current_score = evaluate(0, current)
        initial = Evaluation(-1, current, current_score)
        if table is not None and not literal:
            accumulate(table, current, current_score, config.weighting)
    else:
        current, current_score = FeatureMask.empty(n), None

    steps = []
    for k in range(1, n + 1):
        if backward and len(current) == 1:
            # forced final removal; the empty set is never a candidate answer
            (last,) = current
            steps.append(StepRecord(k, current, (), (), last, FeatureMask.empty(n), math.nan))
            break
        candidates = list(current) if backward else list(current.complement())
        evaluations = []
        for c in candidates:
            mask = current.without(c) if backward else current.with_feature(c)
            evaluations.append(Evaluation(c, mask, evaluate(k, mask)))

        if table is not None:
            accumulate_step(table, current, [(e.candidate, e.mask, e.score) for e in evaluations],
                            config.weighting, config.accumulation_mode, backward, current_score)
            criteria = tuple(estimated_relevance(table, e.candidate, config.lam, e.score, toward)
                             for e in evaluations)
        else:
            criteria = tuple(e.score for e in evaluations)

        pick = 0
        for i in range(1, len(criteria)):
            if criteria[i] > criteria[pick]:
                pick = i
        chosen = evaluations[pick]
        steps.append(StepRecord(k, current, tuple(evaluations), criteria, chosen.candidate,
                                chosen.mask, chosen.score))
        log.info("step %d: %s feature %d -> |X|=%d score=%.4f", k, "removed" if backward else "added",
                 chosen.candidate, len(chosen.mask), chosen.score)
        current, current_score = chosen.mask, chosen.score

    trace = SearchTrace(initial, tuple(steps), calls)
    best_mask, best_score = best_of_trace(trace.scored_path())
    return SelectionResult(best_mask, best_score, trace)


def run_sbg(scorer, dataset) -> SelectionResult:
    return run_search(scorer, dataset, SearchConfig("sbg"))


def run_sbg_plus(scorer, dataset, config: SearchConfig | None = None) -> SelectionResult:
    config = config or SearchConfig("sbg+")
    return run_search(scorer, dataset, _with_algorithm(config, "sbg+"))


def run_sfg(scorer, dataset) -> SelectionResult:
    return run_search(scorer, dataset, SearchConfig("sfg"))


def run_sfg_plus(scorer, dataset, config: SearchConfig | None = None) -> SelectionResult:
    config = config or SearchConfig("sfg+")
    return run_search(scorer, dataset, _with_algorithm(config, "sfg+"))


def _with_algorithm(config: SearchConfig, algorithm: str) -> SearchConfig:
    return SearchConfig(algorithm, config.lam, config.weighting, config.accumulation_mode)
