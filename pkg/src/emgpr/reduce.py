"""Uncorrelated LDA projection, RES separability index, scatter export.

The projection is built by two SVD stages: whiten the total scatter, then
diagonalize the between-class scatter in the whitened space.  Projected
training features come out mutually uncorrelated with unit variance, and the
output dimension is at most n_classes - 1.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateClasses, DimensionMismatch, RankZero, ZeroDispersion

RANK_TOL = 1e-10


@dataclass(frozen=True)
class UldaProjection:
    mean: np.ndarray  # (d_in,)
    matrix: np.ndarray  # (d_in, d_out)
    d_out: int

    def to_dict(self) -> dict:
        return {
            "mean": [float(v) for v in self.mean],
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "d_out": self.d_out,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True))

    @classmethod
    def from_dict(cls, d: dict) -> "UldaProjection":
        return cls(
            mean=np.asarray(d["mean"], dtype=float),
            matrix=np.asarray(d["matrix"], dtype=float),
            d_out=int(d["d_out"]),
        )

    @classmethod
    def load(cls, path) -> "UldaProjection":
        return cls.from_dict(json.loads(Path(path).read_text()))


def fit_ulda(X: np.ndarray, y) -> UldaProjection:
    """Fit the two-stage SVD reduction on a labeled feature matrix.

    Deterministic up to column sign; signs are fixed by making the
    largest-magnitude entry of every column positive.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("X must be (n_samples, d_in)")
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise DegenerateClasses("need at least two classes")
    if counts.min() < 2:
        small = classes[counts.argmin()]
        raise DegenerateClasses(f"class {small!r} has fewer than two samples")

    n = X.shape[0]
    mean = X.mean(axis=0)
    Xc = X - mean

    # whiten the total scatter St = Xc'Xc / n
    _, svals, Vt = np.linalg.svd(Xc / math.sqrt(n), full_matrices=False)
    keep = svals > RANK_TOL * svals[0] if svals[0] > 0 else np.zeros_like(svals, bool)
    if not keep.any():
        raise RankZero("all features are constant")
    whiten = Vt[keep].T / svals[keep]  # (d_in, r)

    # between-class scatter factor: columns sqrt(n_k/n) * (mu_k - mu)
    Hb = np.stack(
        [
            math.sqrt(counts[i] / n) * (X[y == c].mean(axis=0) - mean)
            for i, c in enumerate(classes)
        ],
        axis=1,
    )
    P, sb, _ = np.linalg.svd(whiten.T @ Hb, full_matrices=False)
    keep_b = sb > RANK_TOL * sb[0] if sb[0] > 0 else np.zeros_like(sb, bool)
    d_out = min(int(keep_b.sum()), len(classes) - 1)
    if d_out == 0:
        raise DegenerateClasses("class means coincide; nothing to discriminate")

    matrix = whiten @ P[:, :d_out]
    for j in range(d_out):
        col = matrix[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            matrix[:, j] = -col
    return UldaProjection(mean=mean, matrix=matrix, d_out=d_out)


def project(p: UldaProjection, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    one_dim = X.ndim == 1
    if one_dim:
        X = X[None, :]
    if X.shape[1] != p.matrix.shape[0]:
        raise DimensionMismatch(
            f"expected {p.matrix.shape[0]} features, got {X.shape[1]}"
        )
    out = (X - p.mean) @ p.matrix
    return out[0] if one_dim else out


# ---------------------------------------------------------------------------
# RES index


def _class_stats(reduced: np.ndarray, y):
    y = np.asarray(y)
    classes = np.unique(y)
    means = np.stack([reduced[y == c].mean(axis=0) for c in classes])
    stds = np.stack(
        [
            reduced[y == c].std(axis=0, ddof=1) if (y == c).sum() > 1
            else np.zeros(reduced.shape[1])
            for c in classes
        ]
    )
    return classes, means, stds


def res_index_general(reduced: np.ndarray, y) -> float:
    """Mean pairwise centroid distance over mean within-class dispersion."""
    reduced = np.asarray(reduced, dtype=float)
    if reduced.ndim != 2:
        raise ValueError("reduced must be 2-D")
    classes, means, stds = _class_stats(reduced, y)
    k = len(classes)
    if k < 2:
        raise DegenerateClasses("need at least two classes")
    pair_sum = sum(
        float(np.linalg.norm(means[p] - means[q]))
        for p, q in itertools.combinations(range(k), 2)
    )
    ed_bar = 2.0 / (k * (k - 1)) * pair_sum
    sigma = float(stds.mean())
    if sigma <= 0.0:
        raise ZeroDispersion("all within-class dispersions are zero")
    return ed_bar / sigma


def res_index(reduced2: np.ndarray, y) -> float:
    """RES index on exactly the first two reduced dimensions."""
    reduced2 = np.asarray(reduced2, dtype=float)
    if reduced2.ndim != 2 or reduced2.shape[1] != 2:
        raise ValueError("res_index expects exactly two feature columns")
    return res_index_general(reduced2, y)


def scatter_export(reduced2: np.ndarray, y, path) -> None:
    """Write `label,f1,f2` rows with both columns min-max scaled to [0, 1]."""
    reduced2 = np.asarray(reduced2, dtype=float).reshape(-1, 2)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["label,f1,f2"]
    if len(reduced2):
        mins = reduced2.min(axis=0)
        span = reduced2.max(axis=0) - mins
        span = np.where(span > 0, span, 1.0)
        norm = (reduced2 - mins) / span
        for label, (f1, f2) in zip(y, norm):
            lines.append(f"{label},{float(f1)!r},{float(f2)!r}")
    path.write_text("\n".join(lines) + "\n")
