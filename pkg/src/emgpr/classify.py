"""Three classifiers behind one train/predict interface.

QDA fits class-conditional Gaussians with a shrinkage-regularized covariance,
the SVM trains one-vs-one RBF machines with a deterministic SMO solver, and
KNN memorizes the training set and votes over cityblock neighbors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DegenerateClasses, DimensionMismatch, SingularCovariance

MODEL_FORMAT_VERSION = 1

_KIND_ALIASES = {"qda": "qda", "svm": "svm", "svm_rbf": "svm", "knn": "knn"}


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "qda"
    qda_shrinkage: float = 1e-3
    qda_pooled: bool = False
    svm_sigma: float = 1.0
    svm_c: float = 1.0
    svm_tol: float = 1e-3
    svm_max_passes: int = 10
    knn_k: int = 3
    knn_metric: str = "cityblock"

    def __post_init__(self):
        kind = _KIND_ALIASES.get(self.kind.lower())
        if kind is None:
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not 0.0 <= self.qda_shrinkage <= 1.0:
            raise ValueError("qda_shrinkage must lie in [0, 1]")
        if self.svm_sigma <= 0 or self.svm_c <= 0:
            raise ValueError("svm_sigma and svm_c must be positive")
        if self.knn_k < 1 or self.knn_k % 2 == 0:
            raise ValueError("knn_k must be a positive odd integer")
        if self.knn_metric not in ("cityblock", "euclidean"):
            raise ValueError(f"unknown knn metric {self.knn_metric!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "qda_shrinkage": self.qda_shrinkage,
            "qda_pooled": self.qda_pooled,
            "svm_sigma": self.svm_sigma,
            "svm_c": self.svm_c,
            "svm_tol": self.svm_tol,
            "svm_max_passes": self.svm_max_passes,
            "knn_k": self.knn_k,
            "knn_metric": self.knn_metric,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(**d)


def _check_classes(y, declared):
    y = np.asarray(y)
    present = np.unique(y)
    if declared is not None:
        declared = list(declared)
        missing = [c for c in declared if c not in present]
        if missing:
            raise DegenerateClasses(f"declared classes with no samples: {missing}")
        classes = np.asarray(declared)
    else:
        classes = present
    if len(classes) < 2:
        raise DegenerateClasses("need at least two classes")
    return classes


# ---------------------------------------------------------------------------
# QDA


class QdaModel:
    kind = "qda"

    def __init__(self, classes, priors, means, chols, logdets, pooled):
        self.classes = classes
        self.priors = priors
        self.means = means
        self.chols = chols  # lower Cholesky factor per class
        self.logdets = logdets
        self.pooled = pooled

    @property
    def d_in(self) -> int:
        return self.means.shape[1]

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        """Per-class log-density scores ln pi_k - logdet/2 - maha/2."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        scores = np.empty((X.shape[0], len(self.classes)))
        for k in range(len(self.classes)):
            diff = X - self.means[k]
            z = solve_triangular(self.chols[k], diff.T, lower=True)
            maha = np.sum(z * z, axis=0)
            scores[:, k] = (
                math.log(self.priors[k]) - 0.5 * self.logdets[k] - 0.5 * maha
            )
        return scores

    def predict(self, X: np.ndarray):
        X = np.asarray(X, dtype=float)
        one = X.ndim == 1
        X2 = np.atleast_2d(X)
        if X2.shape[1] != self.d_in:
            raise DimensionMismatch(
                f"expected {self.d_in} features, got {X2.shape[1]}"
            )
        labels = self.classes[np.argmax(self.decision_values(X2), axis=1)]
        return labels[0] if one else labels

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": self.kind,
            "classes": [str(c) for c in self.classes],
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "chols": [c.tolist() for c in self.chols],
            "logdets": [float(v) for v in self.logdets],
            "pooled": self.pooled,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QdaModel":
        return cls(
            classes=np.asarray(d["classes"]),
            priors=np.asarray(d["priors"], dtype=float),
            means=np.asarray(d["means"], dtype=float),
            chols=[np.asarray(c, dtype=float) for c in d["chols"]],
            logdets=list(d["logdets"]),
            pooled=bool(d["pooled"]),
        )


def _shrink(cov: np.ndarray, gamma: float) -> np.ndarray:
    d = cov.shape[0]
    return (1.0 - gamma) * cov + gamma * (np.trace(cov) / d) * np.eye(d)


def _train_qda(spec: ModelSpec, X, y, classes) -> QdaModel:
    n, d = X.shape
    means, covs, priors = [], [], []
    for c in classes:
        Xk = X[y == c]
        means.append(Xk.mean(axis=0))
        covs.append(np.atleast_2d(np.cov(Xk, rowvar=False, ddof=1)))
        priors.append(len(Xk) / n)
    if spec.qda_pooled:
        weights = [p * n - 1 for p in priors]
        pooled = sum(w * c for w, c in zip(weights, covs)) / sum(weights)
        covs = [pooled] * len(classes)
    chols, logdets = [], []
    for c, cov in zip(classes, covs):
        cov = _shrink(cov, spec.qda_shrinkage)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise SingularCovariance(
                f"covariance of class {c!r} is singular; "
                "enable qda_shrinkage to regularize"
            ) from None
        chols.append(chol)
        logdets.append(2.0 * float(np.sum(np.log(np.diag(chol)))))
    return QdaModel(
        classes=classes,
        priors=np.asarray(priors),
        means=np.asarray(means),
        chols=chols,
        logdets=logdets,
        pooled=spec.qda_pooled,
    )


# ---------------------------------------------------------------------------
# SVM (one-vs-one, SMO)


def rbf_kernel(A: np.ndarray, B: np.ndarray, sigma: float) -> np.ndarray:
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * A @ B.T
    )
    return np.exp(-np.maximum(sq, 0.0) / (2.0 * sigma * sigma))


def _smo(K: np.ndarray, y: np.ndarray, c: float, tol: float, max_passes: int):
    """SMO on a precomputed kernel matrix, maximal-violating-pair selection.

    Each iteration updates the pair that violates the KKT conditions the
    most, which is deterministic (numpy argmax tie-breaks on the first
    index) and converges monotonically.  Work is capped at max_passes
    sweeps' worth of pair updates (max_passes * n); hitting the cap returns
    the best-so-far state with converged=False.  On exit the duality gap is
    at most tol, so every training point satisfies KKT within tol.
    """
    n = len(y)
    alpha = np.zeros(n)
    f = np.zeros(n)  # sum_j alpha_j y_j K(x_t, x_j), bias excluded
    pos = y > 0
    max_iter = max(max_passes * n, 100)
    converged = False
    m = top = 1.0
    bottom = -1.0

    for _ in range(max_iter):
        grad = y - f
        in_up = (pos & (alpha < c)) | (~pos & (alpha > 0.0))
        in_low = (pos & (alpha > 0.0)) | (~pos & (alpha < c))
        up_vals = np.where(in_up, grad, -np.inf)
        low_vals = np.where(in_low, grad, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(low_vals))
        top, bottom = up_vals[i], low_vals[j]
        if top - bottom <= tol:
            converged = True
            break
        quad = max(K[i, i] + K[j, j] - 2.0 * K[i, j], 1e-12)
        step = (top - bottom) / quad
        step = min(step, c - alpha[i] if pos[i] else alpha[i])
        step = min(step, alpha[j] if pos[j] else c - alpha[j])
        alpha[i] += step if pos[i] else -step
        alpha[j] -= step if pos[j] else -step
        np.clip(alpha, 0.0, c, out=alpha)
        f += step * (K[:, i] - K[:, j])

    free = (alpha > 1e-9 * c) & (alpha < c * (1.0 - 1e-9))
    if free.any():
        b = float(np.mean((y - f)[free]))
    else:
        b = 0.5 * (float(top) + float(bottom))
    return alpha, b, converged


class SvmModel:
    kind = "svm"

    def __init__(self, classes, sigma, machines, converged, d_in):
        self.classes = classes
        self.sigma = sigma
        self.machines = machines  # {(i, j): (sv, coef, b)} with +1 = class i
        self.converged = converged
        self.d_in = d_in

    def _pair_decision(self, machine, X):
        sv, coef, b = machine
        return rbf_kernel(X, sv, self.sigma) @ coef + b

    def predict(self, X: np.ndarray):
        X = np.asarray(X, dtype=float)
        one = X.ndim == 1
        X2 = np.atleast_2d(X)
        if X2.shape[1] != self.d_in:
            raise DimensionMismatch(
                f"expected {self.d_in} features, got {X2.shape[1]}"
            )
        k = len(self.classes)
        votes = np.zeros((X2.shape[0], k), dtype=int)
        scores = np.zeros((X2.shape[0], k))
        for (i, j), machine in self.machines.items():
            f = self._pair_decision(machine, X2)
            winner_i = f > 0
            votes[:, i] += winner_i
            votes[:, j] += ~winner_i
            scores[:, i] += f
            scores[:, j] -= f
        labels = np.empty(X2.shape[0], dtype=self.classes.dtype)
        for row in range(X2.shape[0]):
            leaders = np.flatnonzero(votes[row] == votes[row].max())
            if len(leaders) > 1:
                # vote tie: decide by the summed decision values
                leaders = leaders[[np.argmax(scores[row, leaders])]]
            labels[row] = self.classes[leaders[0]]
        return labels[0] if one else labels

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": self.kind,
            "classes": [str(c) for c in self.classes],
            "sigma": self.sigma,
            "d_in": self.d_in,
            "converged": self.converged,
            "machines": [
                {
                    "pair": [int(i), int(j)],
                    "support_vectors": sv.tolist(),
                    "dual_coef": coef.tolist(),
                    "bias": float(b),
                }
                for (i, j), (sv, coef, b) in sorted(self.machines.items())
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        machines = {
            tuple(m["pair"]): (
                np.asarray(m["support_vectors"], dtype=float),
                np.asarray(m["dual_coef"], dtype=float),
                float(m["bias"]),
            )
            for m in d["machines"]
        }
        return cls(
            classes=np.asarray(d["classes"]),
            sigma=float(d["sigma"]),
            machines=machines,
            converged=bool(d["converged"]),
            d_in=int(d["d_in"]),
        )


def _train_svm(spec: ModelSpec, X, y, classes) -> SvmModel:
    machines = {}
    converged = True
    for i in range(len(classes)):
        for j in range(i + 1, len(classes)):
            mask = (y == classes[i]) | (y == classes[j])
            Xp = X[mask]
            yp = np.where(y[mask] == classes[i], 1.0, -1.0)
            K = rbf_kernel(Xp, Xp, spec.svm_sigma)
            alpha, b, ok = _smo(K, yp, spec.svm_c, spec.svm_tol, spec.svm_max_passes)
            converged = converged and ok
            keep = alpha > 1e-12
            machines[(i, j)] = (Xp[keep], alpha[keep] * yp[keep], b)
    return SvmModel(
        classes=classes,
        sigma=spec.svm_sigma,
        machines=machines,
        converged=converged,
        d_in=X.shape[1],
    )


# ---------------------------------------------------------------------------
# KNN


class KnnModel:
    kind = "knn"

    def __init__(self, X, y, k, metric):
        self.X = X
        self.y = y
        self.k = k
        self.metric = metric

    @property
    def d_in(self) -> int:
        return self.X.shape[1]

    def predict(self, X: np.ndarray):
        X = np.asarray(X, dtype=float)
        one = X.ndim == 1
        X2 = np.atleast_2d(X)
        if X2.shape[1] != self.d_in:
            raise DimensionMismatch(
                f"expected {self.d_in} features, got {X2.shape[1]}"
            )
        labels = np.empty(X2.shape[0], dtype=self.y.dtype)
        for row, x in enumerate(X2):
            if self.metric == "cityblock":
                dists = np.sum(np.abs(self.X - x), axis=1)
            else:
                dists = np.sqrt(np.sum((self.X - x) ** 2, axis=1))
            order = np.argsort(dists, kind="stable")[: self.k]
            nearest_labels = self.y[order]
            uniq, counts = np.unique(nearest_labels, return_counts=True)
            top = counts.max()
            leaders = uniq[counts == top]
            # vote tie: fall back to the single nearest neighbor
            labels[row] = leaders[0] if len(leaders) == 1 else nearest_labels[0]
        return labels[0] if one else labels

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": self.kind,
            "X": self.X.tolist(),
            "y": [str(v) for v in self.y],
            "k": self.k,
            "metric": self.metric,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KnnModel":
        return cls(
            X=np.asarray(d["X"], dtype=float),
            y=np.asarray(d["y"]),
            k=int(d["k"]),
            metric=d["metric"],
        )


# ---------------------------------------------------------------------------
# public interface


def train(spec: ModelSpec, X: np.ndarray, y, classes=None):
    """Train the classifier named by spec.kind on reduced features."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be (n_samples, d) aligned with y")
    cls = _check_classes(y, classes)
    if spec.kind == "qda":
        return _train_qda(spec, X, y, cls)
    if spec.kind == "svm":
        return _train_svm(spec, X, y, cls)
    return KnnModel(X=X.copy(), y=y.copy(), k=spec.knn_k, metric=spec.knn_metric)


def predict(model, x):
    """Predict label(s) for one vector or a matrix of samples."""
    return model.predict(x)


def model_to_dict(model) -> dict:
    return model.to_dict()


def model_from_dict(d: dict):
    if d.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format {d.get('format_version')!r}")
    kind = d["kind"]
    if kind == "qda":
        return QdaModel.from_dict(d)
    if kind == "svm":
        return SvmModel.from_dict(d)
    if kind == "knn":
        return KnnModel.from_dict(d)
    raise ValueError(f"unknown model kind {kind!r}")
