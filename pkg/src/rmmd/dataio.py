"""CSV and LibSVM readers producing class-labeled dense datasets."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union

import numpy as np


class ParseError(ValueError):
    """Malformed input file; message names the offending row/column."""


@dataclass(frozen=True)
class LabeledDataset:
    points: np.ndarray
    labels: np.ndarray
    short_classes: Tuple[str, ...] = ()  # classes taken whole by subsample_classes

    @property
    def class_index(self) -> Dict[str, np.ndarray]:
        return {str(c): np.flatnonzero(self.labels == c) for c in self.classes}

    @property
    def classes(self) -> List[str]:
        return sorted(set(self.labels.tolist()))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def groups(self) -> List[Tuple[str, np.ndarray]]:
        return [(c, self.points[idx]) for c, idx in self.class_index.items()]


def read_csv(path, label_column: Union[str, int] = -1, has_header: bool = True) -> LabeledDataset:
    """Read a numeric CSV with one label column.

    ``label_column`` is a header name or a 0-based column index (negative allowed).
    Row numbers in error messages count data rows from 1.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = rows.pop(0) if has_header else None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    width = len(header) if header else len(rows[0])
    names = header or [str(i) for i in range(width)]
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if label_column not in names:
            raise ParseError(f"{path}: missing label column {label_column!r}")
        li = names.index(label_column)
    else:
        li = int(label_column)
        if not -width <= li < width:
            raise ParseError(f"{path}: missing label column {label_column!r}")
        li %= width
    feat_cols = [j for j in range(width) if j != li]
    points = np.empty((len(rows), len(feat_cols)))
    labels = []
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(f"{path}: row {i} has {len(row)} fields, expected {width}")
        labels.append(row[li].strip())
        for out_j, j in enumerate(feat_cols):
            try:
                points[i - 1, out_j] = float(row[j])
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric value {row[j]!r} at row {i}, column {names[j]}"
                ) from None
    return LabeledDataset(points, np.array(labels, dtype=object))


def write_csv(ds: LabeledDataset, path) -> None:
    """Write features as ``f0..f{d-1}`` plus a trailing ``label`` column (full precision)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{j}" for j in range(ds.dim)] + ["label"])
        for row, lab in zip(ds.points, ds.labels):
            w.writerow([repr(float(v)) for v in row] + [lab])


def read_points(path, has_header: bool = False) -> np.ndarray:
    """Unlabeled numeric CSV -> ``(n, d)`` array (one row per point)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if has_header and rows:
        rows.pop(0)
    if not rows:
        raise ParseError(f"{path}: empty file")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(f"{path}: row {i} has {len(row)} fields, expected {width}")
        try:
            out[i - 1] = [float(v) for v in row]
        except ValueError:
            raise ParseError(f"{path}: non-numeric value at row {i}") from None
    return out


def write_points(points, path) -> None:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in pts:
            w.writerow([repr(float(v)) for v in row])


def read_libsvm(path) -> LabeledDataset:
    """Parse ``label idx:val ...`` lines (1-based, strictly increasing indices)."""
    labels, entries = [], []
    width = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            labels.append(tokens[0])
            row, last = [], 0
            for tok in tokens[1:]:
                idx, sep, val = tok.partition(":")
                try:
                    j, v = int(idx), float(val)
                except ValueError:
                    raise ParseError(f"{path}: malformed token {tok!r} on line {lineno}") from None
                if not sep or j < 1:
                    raise ParseError(f"{path}: malformed token {tok!r} on line {lineno}")
                if j <= last:
                    raise ParseError(f"{path}: non-increasing index {j} on line {lineno}")
                last = j
                row.append((j - 1, v))
            width = max(width, last)
            entries.append(row)
    if not labels:
        raise ParseError(f"{path}: empty file")
    points = np.zeros((len(labels), width))
    for i, row in enumerate(entries):
        for j, v in row:
            points[i, j] = v
    return LabeledDataset(points, np.array(labels, dtype=object))


def subsample_classes(ds: LabeledDataset, per_class: int, seed) -> LabeledDataset:
    """Seeded per-class sampling without replacement; short classes are kept whole and flagged."""
    if per_class < 1:
        raise ValueError("per_class must be positive")
    rng = np.random.default_rng(seed)
    keep, short = [], []
    for c, idx in ds.class_index.items():
        if idx.size <= per_class:
            if idx.size < per_class:
                short.append(c)
            keep.append(idx)
        else:
            keep.append(np.sort(rng.choice(idx, per_class, replace=False)))
    if short:
        warnings.warn(f"classes smaller than {per_class} taken whole: {short}", stacklevel=2)
    rows = np.sort(np.concatenate(keep))
    return LabeledDataset(ds.points[rows], ds.labels[rows], tuple(short))


def standardize(ds: LabeledDataset) -> LabeledDataset:
    """Per-feature zero mean / unit variance; constant features are only centered."""
    mu = ds.points.mean(axis=0)
    sd = ds.points.std(axis=0)
    sd[sd == 0] = 1.0
    return LabeledDataset((ds.points - mu) / sd, ds.labels, ds.short_classes)
