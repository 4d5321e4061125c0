"""Dataset container, CSV ingestion, synthetic data and stratified 5x2 splits."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np


class DataError(ValueError):
    """Raised when a dataset or split request violates its invariants."""


class ParseError(DataError):
    """Raised for malformed CSV input."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Samples-by-features matrix with one class label per row.

    Per-class minimum sizes are checked by :func:`make_5x2_plan`, which is
    where they matter. ``sample_ids`` tracks the row positions in the originating dataset, so
    subsets taken with :meth:`take_rows` can be traced back (the experiment
    harness uses this to audit which rows each phase touched).
    """

    values: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    sample_ids: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        labels = np.asarray(self.labels).astype(str)
        if values.ndim != 2:
            raise DataError(f"values must be 2-D, got shape {values.shape}")
        if labels.shape != (values.shape[0],):
            raise DataError(f"{labels.shape[0]} labels for {values.shape[0]} rows")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != values.shape[1]:
            raise DataError(f"{len(names)} feature names for {values.shape[1]} columns")
        if not np.all(np.isfinite(values)):
            raise DataError("values contain NaN or infinity")
        classes = np.unique(labels)
        if len(classes) < 2:
            raise DataError(f"need at least 2 classes, got {list(classes)}")
        ids = np.arange(values.shape[0]) if self.sample_ids is None else np.asarray(self.sample_ids, dtype=np.intp)
        if ids.shape != (values.shape[0],):
            raise DataError("sample_ids length does not match row count")
        values.flags.writeable = False
        labels.flags.writeable = False
        ids = ids.copy()
        ids.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "sample_ids", ids)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @cached_property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)

    @cached_property
    def codes(self) -> np.ndarray:
        """Labels as integer indices into :attr:`classes`."""
        return np.searchsorted(self.classes, self.labels)

    @cached_property
    def fingerprint(self) -> str:
        h = hashlib.sha1()
        h.update(np.ascontiguousarray(self.values).tobytes())
        h.update("\x1f".join(self.labels.tolist()).encode())
        h.update(str(self.values.shape).encode())
        return h.hexdigest()

    def take_rows(self, rows) -> Dataset:
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(self.values[rows], self.labels[rows], self.feature_names, self.sample_ids[rows])

    def take_columns(self, cols) -> Dataset:
        cols = np.asarray(cols, dtype=np.intp)
        names = tuple(self.feature_names[c] for c in cols)
        return Dataset(self.values[:, cols], self.labels, names, self.sample_ids)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _resolve_label_column(selector: Union[int, str], header: Sequence[str] | None, width: int) -> int:
    if isinstance(selector, str) and not selector.lstrip("-").isdigit():
        if header is None:
            raise ParseError(f"label column {selector!r} given by name but the file has no header")
        if selector not in header:
            raise ParseError(f"label column {selector!r} not in header {list(header)}")
        return list(header).index(selector)
    idx = int(selector)
    if not -width <= idx < width:
        raise ParseError(f"label column index {idx} out of range for {width} columns")
    return idx % width


def load_csv(path, label_column: Union[int, str] = -1) -> Dataset:
    """Read a comma-separated dataset.

    The first line is a header iff one of its cells outside the label
    column is non-numeric. Without a header, features are named f0..f{n-1}.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{path}: empty file")
    width = len(rows[0])
    if width < 2:
        raise ParseError(f"{path}: need at least one feature column and a label column")

    first = [c.strip() for c in rows[0]]
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        has_header = True
    else:
        lab = int(label_column) % width
        has_header = any(not _is_number(c) for i, c in enumerate(first) if i != lab)
    header = first if has_header else None
    lab = _resolve_label_column(label_column, header, width)

    body = rows[1:] if has_header else rows
    values, labels = [], []
    line0 = 2 if has_header else 1
    for k, row in enumerate(body):
        lineno = line0 + k
        if len(row) != width:
            raise ParseError(f"{path}: row {lineno} has {len(row)} cells, expected {width}")
        feats = []
        for j, cell in enumerate(row):
            if j == lab:
                continue
            try:
                feats.append(float(cell))
            except ValueError:
                raise ParseError(f"{path}: row {lineno}, column {j + 1}: non-numeric value {cell!r}") from None
        values.append(feats)
        labels.append(row[lab].strip())
    if not values:
        raise ParseError(f"{path}: no data rows")

    if header is not None:
        names = [h for j, h in enumerate(header) if j != lab]
    else:
        names = [f"f{j}" for j in range(width - 1)]
    return Dataset(np.array(values), np.array(labels), tuple(names))


def write_csv(dataset: Dataset, path, label_name: str = "class") -> None:
    """Write with a header row; floats at 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*dataset.feature_names, label_name])
        for row, label in zip(dataset.values, dataset.labels):
            w.writerow([format(v, ".17g") for v in row] + [label])


@dataclass(frozen=True)
class SyntheticSpec:
    n_samples: int
    n_informative: int
    n_noise: int
    class_separation: float = 2.0
    seed: int = 0


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Two balanced Gaussian classes ``A`` and ``B``.

    Columns ``0..n_informative-1`` have class means ``-sep/2`` and ``+sep/2``;
    the rest are N(0, 1) for both classes.
    """
    if spec.n_informative < 0 or spec.n_noise < 0:
        raise DataError("feature counts must be non-negative")
    n_features = spec.n_informative + spec.n_noise
    if n_features < 1:
        raise DataError("synthetic spec has zero features")
    if spec.n_samples < 4:
        raise DataError("need at least 4 samples (2 per class)")
    if spec.class_separation < 0:
        raise DataError("class_separation must be non-negative")

    rng = np.random.default_rng(spec.seed)
    n_b = spec.n_samples // 2
    n_a = spec.n_samples - n_b
    labels = np.array(["A"] * n_a + ["B"] * n_b)
    labels = labels[rng.permutation(spec.n_samples)]

    values = rng.standard_normal((spec.n_samples, n_features))
    shift = np.where(labels == "B", 0.5, -0.5) * spec.class_separation
    values[:, : spec.n_informative] += shift[:, None]
    names = [f"inf{j}" for j in range(spec.n_informative)] + [f"noise{j}" for j in range(spec.n_noise)]
    return Dataset(values, labels, tuple(names))


@dataclass(frozen=True)
class SplitPlan:
    """Five repetitions of a stratified two-way partition of sample indices."""

    repetitions: tuple[tuple[np.ndarray, np.ndarray], ...]
    seed: int

    def orientations(self):
        """Yield ``(fold_index, repetition, orientation, train, test)`` for all 10 pairs."""
        for r, (a, b) in enumerate(self.repetitions):
            yield 2 * r, r, 0, a, b
            yield 2 * r + 1, r, 1, b, a


def stratified_halves(labels: np.ndarray, rng: np.random.Generator, odd_to_first: bool = True):
    """Deal each class's shuffled indices alternately into two folds.

    Classes are visited in sorted order. Whenever a class has an odd count,
    the extra sample goes to the current "first" fold, and that role flips.
    """
    fold_a, fold_b = [], []
    first_is_a = odd_to_first
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(len(idx))]
        lead, other = (fold_a, fold_b) if first_is_a else (fold_b, fold_a)
        lead.extend(idx[0::2].tolist())
        other.extend(idx[1::2].tolist())
        if len(idx) % 2:
            first_is_a = not first_is_a
    return np.sort(np.array(fold_a, dtype=np.intp)), np.sort(np.array(fold_b, dtype=np.intp))


def make_5x2_plan(labels_or_dataset, seed: int = 0) -> SplitPlan:
    """Stratified 5x2 plan; each repetition uses its own spawned RNG stream."""
    labels = labels_or_dataset.labels if isinstance(labels_or_dataset, Dataset) else np.asarray(labels_or_dataset).astype(str)
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) < 2:
        raise DataError("need at least 2 classes for a stratified split")
    if counts.min() < 2:
        raise DataError(f"every class needs >= 2 samples for 2-fold stratification, counts={dict(zip(classes.tolist(), counts.tolist()))}")
    streams = np.random.SeedSequence(seed).spawn(5)
    reps = []
    for r, ss in enumerate(streams):
        a, b = stratified_halves(labels, np.random.default_rng(ss), odd_to_first=(r % 2 == 0))
        a.flags.writeable = False
        b.flags.writeable = False
        reps.append((a, b))
    return SplitPlan(tuple(reps), seed)


def derive_seeds(seed: int, count: int) -> list[int]:
    """Independent integer seeds from one master seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


__all__ = [
    "DataError",
    "Dataset",
    "ParseError",
    "SplitPlan",
    "SyntheticSpec",
    "derive_seeds",
    "generate_synthetic",
    "load_csv",
    "make_5x2_plan",
    "stratified_halves",
    "write_csv",
]
