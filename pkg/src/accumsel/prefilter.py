"""Univariate gene ranking by between/within-class sum of squares."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from accumsel.dataset import Dataset, DataError


@dataclass(frozen=True)
class GeneRanking:
    order: np.ndarray  # feature indices, best first
    scores: np.ndarray  # ratio per feature, indexed by original feature
    bss: np.ndarray
    wss: np.ndarray

    def __iter__(self):
        return ((int(j), float(self.scores[j])) for j in self.order)


def sums_of_squares(dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature between-class and within-class sums of squares."""
    x = dataset.values
    grand = x.mean(axis=0)
    bss = np.zeros(x.shape[1])
    wss = np.zeros(x.shape[1])
    for c in range(len(dataset.classes)):
        xc = x[dataset.codes == c]
        mc = xc.mean(axis=0)
        bss += len(xc) * (mc - grand) ** 2
        wss += ((xc - mc) ** 2).sum(axis=0)
    # sums at rounding-noise level (e.g. a shifted constant column) are exact zeros
    noise = 64 * np.finfo(np.float64).eps * x.shape[0] * (x ** 2).max(axis=0, initial=0.0)
    bss[bss <= noise] = 0.0
    wss[wss <= noise] = 0.0
    return bss, wss


def bss_wss_rank(dataset: Dataset) -> GeneRanking:
    """Rank features by BSS/WSS, descending, ties by ascending index.

    WSS = 0 gives +inf when BSS > 0 and 0 when BSS = 0 too.
    """
    if len(dataset.classes) < 2:
        raise DataError("ranking needs at least 2 classes")
    bss, wss = sums_of_squares(dataset)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(wss > 0, bss / np.where(wss > 0, wss, 1.0), np.where(bss > 0, np.inf, 0.0))
    order = np.lexsort((np.arange(len(ratio)), -ratio))
    return GeneRanking(order, ratio, bss, wss)


def select_top_k(dataset: Dataset, ranking: GeneRanking, k: int) -> tuple[Dataset, np.ndarray]:
    """Keep the ``k`` best-ranked columns in their original order.

    Returns the reduced dataset and the map from new to original column index.
    """
    n = dataset.n_features
    if not 1 <= k <= n:
        raise DataError(f"k must be in [1, {n}], got {k}")
    keep = np.sort(ranking.order[:k])
    return dataset.take_columns(keep), keep
