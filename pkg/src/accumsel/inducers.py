"""Built-in inducers (1-NN, shrunk LDA) and the resampled subset scorer."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist

from accumsel.dataset import Dataset, DataError, SplitPlan, make_5x2_plan
from accumsel.mask import FeatureMask

INDUCERS = ("1nn", "lda")
DEFAULT_LDA_GAMMA = 1e-6
# Condition number above which the shrunk covariance is treated as singular.
MAX_CONDITION = 1e12


class SingularCovarianceError(ArithmeticError):
    """The (shrunk) pooled covariance could not be inverted reliably."""


@dataclass(frozen=True)
class InducerKind:
    name: str = "1nn"
    lda_gamma: float = DEFAULT_LDA_GAMMA

    def __post_init__(self):
        if self.name not in INDUCERS:
            raise DataError(f"unknown inducer {self.name!r}; choose from {INDUCERS}")
        if not self.lda_gamma >= 0:
            raise DataError(f"lda_gamma must be >= 0, got {self.lda_gamma}")

    def fit_predict(self, train_x, train_y, mask, test_x) -> np.ndarray:
        if self.name == "1nn":
            return predict_1nn(train_x, train_y, mask, np.atleast_2d(test_x))
        return fit_predict_lda(train_x, train_y, mask, test_x, gamma=self.lda_gamma)


def _columns(mask, width: int) -> np.ndarray:
    if mask is None:
        return np.arange(width)
    if isinstance(mask, FeatureMask):
        if mask.width != width:
            raise DataError(f"mask width {mask.width} != feature count {width}")
        return mask.indices()
    return np.asarray(mask, dtype=np.intp)


def majority_label(labels) -> str:
    """Most frequent label; ties go to the smallest label."""
    classes, counts = np.unique(np.asarray(labels), return_counts=True)
    return classes[np.argmax(counts)]


def predict_1nn(train_x, train_y, mask, query):
    """Label of the nearest training row under Euclidean distance on ``mask``.

    Distance ties resolve to the lowest training index. With an empty mask
    every query gets the training majority label.
    """
    train_x = np.asarray(train_x, dtype=np.float64)
    train_y = np.asarray(train_y)
    if train_x.shape[0] == 0:
        raise DataError("empty training set")
    query = np.asarray(query, dtype=np.float64)
    single = query.ndim == 1
    q = np.atleast_2d(query)
    cols = _columns(mask, train_x.shape[1])
    if len(cols) == 0:
        out = np.full(q.shape[0], majority_label(train_y), dtype=train_y.dtype)
    else:
        d = cdist(q[:, cols], train_x[:, cols], "sqeuclidean")
        out = train_y[np.argmin(d, axis=1)]
    return out[0] if single else out


def fit_predict_lda(train_x, train_y, mask, test_x, gamma: float = DEFAULT_LDA_GAMMA) -> np.ndarray:
    """Linear discriminant with pooled covariance ``S + gamma*mean(diag S)*I``.

    Priors are the training class frequencies; discriminant ties resolve to
    the smallest class label.
    """
    train_x = np.asarray(train_x, dtype=np.float64)
    train_y = np.asarray(train_y)
    test_x = np.atleast_2d(np.asarray(test_x, dtype=np.float64))
    classes, codes, counts = np.unique(train_y, return_inverse=True, return_counts=True)
    if len(classes) < 2:
        raise DataError("LDA needs at least 2 classes in the training data")
    cols = _columns(mask, train_x.shape[1])
    if len(cols) == 0:
        return np.full(test_x.shape[0], majority_label(train_y), dtype=train_y.dtype)

    xt = train_x[:, cols]
    n, k = xt.shape[0], len(classes)
    if n - k <= 0:
        raise SingularCovarianceError("not enough samples for a pooled covariance")
    means = np.stack([xt[codes == c].mean(axis=0) for c in range(k)])
    resid = xt - means[codes]
    cov = resid.T @ resid / (n - k)
    cov = cov + gamma * np.mean(np.diag(cov)) * np.eye(len(cols))
    cond = np.linalg.cond(cov)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularCovarianceError(f"pooled covariance condition number {cond:.3g}")
    w = np.linalg.solve(cov, means.T)
    bias = -0.5 * np.einsum("kp,pk->k", means, w) + np.log(counts / n)
    scores = test_x[:, cols] @ w + bias
    return classes[np.argmax(scores, axis=1)]


class CallCounter:
    """Thread-safe count of logical scorer invocations."""

    def __init__(self):
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    def increment(self) -> None:
        with self._lock:
            self._calls += 1


class SubsetScorer:
    """Mean accuracy of an inducer over a stratified inner 5x2 plan.

    The split plan depends only on ``inner_seed`` and the dataset labels, so
    every mask scored against the same dataset sees the same 10 fold pairs.
    Scores are cached by mask; the counter still advances on cache hits.
    """

    def __init__(self, inducer: InducerKind | None = None, inner_seed: int = 0, memoize: bool = True):
        self.inducer = inducer or InducerKind()
        self.inner_seed = inner_seed
        self.memoize = memoize
        self.counter = CallCounter()
        self._plans: dict[str, SplitPlan] = {}
        self._memo: dict[tuple[str, int], float] = {}
        self._lock = threading.Lock()

    def plan_for(self, dataset: Dataset) -> SplitPlan:
        key = dataset.fingerprint
        with self._lock:
            plan = self._plans.get(key)
        if plan is None:
            plan = make_5x2_plan(dataset, self.inner_seed)
            with self._lock:
                plan = self._plans.setdefault(key, plan)
        return plan

    def score(self, dataset: Dataset, mask: FeatureMask, counter: CallCounter | None = None) -> float:
        if mask.width != dataset.n_features:
            raise DataError(f"mask width {mask.width} != feature count {dataset.n_features}")
        (counter or self.counter).increment()
        key = (dataset.fingerprint, mask.bits)
        if self.memoize:
            with self._lock:
                hit = self._memo.get(key)
            if hit is not None:
                return hit
        value = self._evaluate(dataset, mask)
        if self.memoize:
            with self._lock:
                self._memo.setdefault(key, value)
        return value

    def _evaluate(self, dataset: Dataset, mask: FeatureMask) -> float:
        x, y = dataset.values, dataset.labels
        accs = []
        for _, _, _, train, test in self.plan_for(dataset).orientations():
            try:
                pred = self.inducer.fit_predict(x[train], y[train], mask, x[test])
            except SingularCovarianceError:
                accs.append(0.0)
                continue
            accs.append(float(np.mean(pred == y[test])))
        return float(np.mean(accs))


def score_subset(scorer, dataset: Dataset, mask: FeatureMask, counter: CallCounter | None = None) -> float:
    return scorer.score(dataset, mask, counter)


class FunctionScorer:
    """Adapts a plain ``mask -> score`` callable to the scorer interface."""

    def __init__(self, fn: Callable[[FeatureMask], float]):
        self.fn = fn
        self.counter = CallCounter()

    def score(self, dataset, mask: FeatureMask, counter: CallCounter | None = None) -> float:
        (counter or self.counter).increment()
        return float(self.fn(mask))
