"""Synthetic ball datasets and their CSV form."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .poincare import exp0_ball, log0_ball, wrapped_normal_sample

PROTOTYPE_RADIUS = 0.5
CSV_MAX_NORM = 0.9


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray  # (N, m) points in the open unit ball
    y: np.ndarray  # (N,) integer labels in [0, n_classes)
    n_classes: int

    def __len__(self) -> int:
        return len(self.y)

    @property
    def dim(self) -> int:
        return self.x.shape[1]


def _simplex_directions(dim: int, classes: int) -> np.ndarray:
    # centered standard basis of R^classes, expressed in an orthonormal basis
    # of its (classes - 1)-dimensional span and padded with zeros up to dim
    centered = np.eye(classes) - 1.0 / classes
    q, _ = np.linalg.qr(centered.T)
    coords = centered @ q[:, : classes - 1]
    coords /= np.linalg.norm(coords, axis=1, keepdims=True)
    out = np.zeros((classes, dim))
    out[:, : classes - 1] = coords
    return out


def _repelled_directions(dim: int, classes: int, iters: int = 2000) -> np.ndarray:
    u = np.random.default_rng(0).standard_normal((classes, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    for _ in range(iters):
        diff = u[:, None, :] - u[None, :, :]
        dist2 = np.sum(diff**2, axis=-1) + np.eye(classes)
        force = np.sum(diff / dist2[..., None] ** 2, axis=1)
        u = u + 0.01 * force
        u /= np.linalg.norm(u, axis=1, keepdims=True)
    return u


def prototype_directions(dim: int, classes: int) -> np.ndarray:
    """Well-separated unit vectors: a regular polygon in 2-D, a simplex when
    ``classes <= dim + 1``, deterministic electrostatic repulsion otherwise."""
    if classes < 2:
        raise ValueError("need at least two classes")
    if dim < 1:
        raise ValueError("dimension must be positive")
    if dim == 2:
        ang = 2.0 * np.pi * np.arange(classes) / classes
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if classes <= dim + 1:
        return _simplex_directions(dim, classes)
    if dim == 1:
        raise ValueError("a 1-D ball only has room for two well-separated classes")
    return _repelled_directions(dim, classes)


def gen_synthetic(dim: int, classes: int, samples: int, sigma: float = 0.1, seed: int = 0) -> Dataset:
    """Wrapped-normal clusters around prototypes at hyperbolic radius ``2 artanh(0.5)``.

    Labels are balanced (``i mod classes``) and shuffled.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    protos = exp0_ball(PROTOTYPE_RADIUS * prototype_directions(dim, classes))
    rng = np.random.default_rng(seed)
    y = rng.permutation(np.arange(samples) % classes)
    x = wrapped_normal_sample(protos[y], sigma, rng)
    return Dataset(x, y.astype(np.int64), classes)


def save_csv(ds: Dataset, path) -> None:
    """Write ``f0..f{D-1},label`` rows; features are origin log-map coordinates."""
    v = log0_ball(ds.x)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"f{i}" for i in range(ds.dim)] + ["label"])
        for row, label in zip(v, ds.y):
            w.writerow([repr(float(c)) for c in row] + [int(label)])


class CsvFormatError(ValueError):
    pass


def load_csv(path, n_classes: int | None = None) -> Dataset:
    """Read a ``f0..f{D-1},label`` CSV into the ball.

    Feature rows ``v`` are mapped to ``exp0(s v)`` with ``s`` chosen so the
    largest image has norm 0.9. Line numbers in errors count the header as 1.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvFormatError(f"{path}: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    dim = len(header) - 1
    expected = [f"f{i}" for i in range(dim)] + ["label"]
    if dim < 1 or header != expected:
        raise CsvFormatError(f"{path}: line 1: header must be f0..f{{D-1}},label, got {','.join(header)}")
    feats, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != dim + 1:
            raise CsvFormatError(f"{path}: line {lineno}: expected {dim + 1} columns, got {len(row)}")
        try:
            vals = [float(c) for c in row[:-1]]
        except ValueError:
            raise CsvFormatError(f"{path}: line {lineno}: non-numeric feature in {row[:-1]}") from None
        if not all(np.isfinite(vals)):
            raise CsvFormatError(f"{path}: line {lineno}: non-finite feature")
        try:
            label = int(row[-1])
        except ValueError:
            raise CsvFormatError(f"{path}: line {lineno}: label {row[-1]!r} is not an integer") from None
        if label < 0 or (n_classes is not None and label >= n_classes):
            raise CsvFormatError(f"{path}: line {lineno}: label {label} out of range")
        feats.append(vals)
        labels.append(label)
    if not feats:
        raise CsvFormatError(f"{path}: no data rows")
    v = np.asarray(feats)
    vmax = np.max(np.linalg.norm(v, axis=1))
    scale = np.arctanh(CSV_MAX_NORM) / vmax if vmax > 0 else 1.0
    y = np.asarray(labels, dtype=np.int64)
    return Dataset(exp0_ball(scale * v), y, n_classes if n_classes is not None else int(y.max()) + 1)
