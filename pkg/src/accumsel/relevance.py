"""Per-feature evidence accumulators, the mixed step criterion, and an exact
exhaustive relevance computation for small feature counts.

For a feature ``x`` the relevance is the mean score of all subsets that
contain ``x`` minus the mean score of all subsets that do not. During a
search the same two averages are estimated from whatever subsets the search
happened to evaluate; those running estimates live in
:class:`AccumulatorTable`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from accumsel.dataset import DataError
from accumsel.mask import FeatureMask

PER_SUBSET = "per_subset"
LITERAL_ALG2 = "literal_alg2"
ACCUMULATION_MODES = (PER_SUBSET, LITERAL_ALG2)
DEFAULT_ORACLE_GUARD = 20


class Weighting(str, enum.Enum):
    """Weight given to one evaluated subset when it enters an average."""

    UNIT = "unit"
    SIZE = "size"  # |X| / n
    SCORE = "score"  # J(X)

    def weight(self, mask: FeatureMask, score: float) -> float:
        if self is Weighting.UNIT:
            return 1.0
        if self is Weighting.SIZE:
            return len(mask) / mask.width
        return float(score)


@dataclass
class AccumulatorTable:
    """Weighted running sums split by whether the feature was in the subset."""

    plus_sum: np.ndarray
    plus_weight: np.ndarray
    minus_sum: np.ndarray
    minus_weight: np.ndarray
    n_plus: np.ndarray
    n_minus: np.ndarray

    @classmethod
    def zeros(cls, width: int) -> AccumulatorTable:
        f = lambda: np.zeros(width, dtype=np.float64)
        i = lambda: np.zeros(width, dtype=np.int64)
        return cls(f(), f(), f(), f(), i(), i())

    @property
    def width(self) -> int:
        return len(self.plus_sum)

    def averages(self, x: int) -> tuple[float | None, float | None]:
        """``(avg_plus, avg_minus)`` for feature ``x``; ``None`` where no weight accrued."""
        plus = float(self.plus_sum[x] / self.plus_weight[x]) if self.plus_weight[x] > 0 else None
        minus = float(self.minus_sum[x] / self.minus_weight[x]) if self.minus_weight[x] > 0 else None
        return plus, minus

    def copy(self) -> AccumulatorTable:
        return AccumulatorTable(*(a.copy() for a in (
            self.plus_sum, self.plus_weight, self.minus_sum, self.minus_weight, self.n_plus, self.n_minus)))


def _check_score(score: float) -> None:
    if not 0.0 <= score <= 1.0:
        raise DataError(f"subset scores must lie in [0, 1], got {score}")


def accumulate(table: AccumulatorTable, mask: FeatureMask, score: float,
               weighting: Weighting = Weighting.UNIT) -> AccumulatorTable:
    """Fold one evaluated subset into every feature's accumulator, in place.

    Features in ``mask`` update their plus side, all others their minus side.
    """
    if mask.width != table.width:
        raise DataError(f"mask width {mask.width} != table width {table.width}")
    _check_score(score)
    w = Weighting(weighting).weight(mask, score)
    inside = mask.as_bool()
    table.plus_sum[inside] += score * w
    table.plus_weight[inside] += w
    table.n_plus[inside] += 1
    table.minus_sum[~inside] += score * w
    table.minus_weight[~inside] += w
    table.n_minus[~inside] += 1
    return table


def accumulate_step(table: AccumulatorTable, current: FeatureMask,
                    evaluations: Sequence[tuple[int, FeatureMask, float]],
                    weighting: Weighting = Weighting.UNIT, mode: str = PER_SUBSET,
                    backward: bool = True, current_score: float | None = None) -> AccumulatorTable:
    """Apply one search step's evaluations to ``table``.

    ``evaluations`` holds ``(candidate, mask, score)`` in candidate order.

    In ``literal_alg2`` mode a backward step over current set S adds, for each
    x in S, the sum of the scores of S minus y for every other y in S to the
    plus side, and for each x outside S adds J(S) (``current_score``) to the
    minus side; counters advance by one per feature per step. The forward
    step is the mirror image over the complement of S. Weighting must be unit.
    """
    if mode == PER_SUBSET:
        for _, mask, score in evaluations:
            accumulate(table, mask, score, weighting)
        return table
    if mode != LITERAL_ALG2:
        raise DataError(f"unknown accumulation mode {mode!r}")
    if Weighting(weighting) is not Weighting.UNIT:
        raise DataError("literal_alg2 accumulation only supports unit weighting")
    if current.width != table.width:
        raise DataError(f"mask width {current.width} != table width {table.width}")
    for _, _, score in evaluations:
        _check_score(score)

    by_candidate = {c: s for c, _, s in evaluations}
    for x in range(table.width):
        candidate = (x in current) == backward
        if candidate:
            total = sum(by_candidate[y] for y in sorted(by_candidate) if y != x)
        else:
            if current_score is None:
                raise DataError("current subset score required for literal_alg2 accumulation")
            total = current_score
        if (x in current):
            table.plus_sum[x] += total
            table.plus_weight[x] += 1
            table.n_plus[x] += 1
        else:
            table.minus_sum[x] += total
            table.minus_weight[x] += 1
            table.n_minus[x] += 1
    return table


def _check_lambda(lam: float) -> None:
    if not 0.0 <= lam <= 1.0:
        raise DataError(f"lambda must lie in [0, 1], got {lam}")


def estimated_relevance(table: AccumulatorTable, x: int, lam: float, j_hat: float,
                        toward: str = "add") -> float:
    """``lam/2 * (evidence + 1) + (1 - lam) * j_hat``.

    ``evidence`` is ``avg_plus - avg_minus`` when scoring the addition (or
    keeping) of ``x`` and ``avg_minus - avg_plus`` when ``toward="remove"``.
    A side with no accumulated weight takes ``j_hat`` as its average.
    """
    _check_lambda(lam)
    plus, minus = table.averages(x)
    plus = j_hat if plus is None else plus
    minus = j_hat if minus is None else minus
    if toward == "add":
        evidence = plus - minus
    elif toward == "remove":
        evidence = minus - plus
    else:
        raise DataError(f"toward must be 'add' or 'remove', got {toward!r}")
    return lam / 2 * (evidence + 1) + (1 - lam) * j_hat


@dataclass(frozen=True)
class ExactOracleResult:
    """Exhaustive per-feature relevance quantities.

    ``r`` is the difference of the with/without averages, ``r_compact`` the
    average marginal gain J(X + x) - J(X) over subsets X lacking x, and
    ``r_weighted`` the same gain averaged with weights w(X).
    """

    l_plus: np.ndarray
    l_minus: np.ndarray
    r: np.ndarray
    r_compact: np.ndarray
    r_weighted: np.ndarray
    weighting: Weighting
    scores: np.ndarray


def _popcount(values: np.ndarray) -> np.ndarray:
    return np.bitwise_count(values.astype(np.uint64)).astype(np.int64)


def exact_relevance(score_fn: Callable[[FeatureMask], float] | np.ndarray, n: int,
                    weighting: Weighting = Weighting.UNIT,
                    guard: int = DEFAULT_ORACLE_GUARD) -> ExactOracleResult:
    """Enumerate all ``2**n`` subsets once and compute every relevance form.

    ``score_fn`` may also be a length ``2**n`` array indexed by mask bits.
    Where every weight is zero ``r_weighted`` is NaN.
    """
    if n < 1:
        raise DataError("need at least one feature")
    if n > guard:
        raise DataError(f"exhaustive relevance over n={n} features exceeds the guard of {guard} (2**{n} subsets)")
    bits = np.arange(1 << n, dtype=np.int64)
    if callable(score_fn):
        scores = np.array([float(score_fn(FeatureMask(n, int(b)))) for b in bits])
    else:
        scores = np.asarray(score_fn, dtype=np.float64)
        if scores.shape != (1 << n,):
            raise DataError(f"score table has {scores.shape} entries, expected {1 << n}")
    weighting = Weighting(weighting)
    sizes = _popcount(bits)

    half = float(1 << (n - 1))
    l_plus = np.empty(n)
    l_minus = np.empty(n)
    r_compact = np.empty(n)
    r_weighted = np.empty(n)
    for x in range(n):
        bit = 1 << x
        has = (bits & bit) != 0
        l_plus[x] = scores[has].sum() / half
        l_minus[x] = scores[~has].sum() / half
        lacking = bits[~has]
        gain = scores[lacking | bit] - scores[lacking]
        r_compact[x] = gain.sum() / half
        if weighting is Weighting.UNIT:
            w = np.ones(len(lacking))
        elif weighting is Weighting.SIZE:
            w = sizes[lacking] / n
        else:
            w = scores[lacking]
        total = w.sum()
        r_weighted[x] = (gain * w).sum() / total if total > 0 else np.nan
    return ExactOracleResult(l_plus, l_minus, l_plus - l_minus, r_compact, r_weighted, weighting, scores)
