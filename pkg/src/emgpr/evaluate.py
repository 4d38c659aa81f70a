"""Trial-wise cross-validation, confusion metrics, sweeps and ANOVA.

crossvalidate holds one trial of every movement out per fold; min-max bounds,
the ULDA projection and the classifier are all fitted on the training folds
only, so no test information leaks into the fitted pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .classify import ModelSpec, train
from .dataset import MOVEMENTS, NO_MIX, mix_awgn
from .errors import EmgprError, EmptyMatrix, InsufficientGroups
from .features import FeatureSetSpec, extract_matrix
from .preprocess import FilterSpec, apply_filters, normalize_features, segment
from .reduce import fit_ulda, project
from .seeding import derive_seed

METRIC_NAMES = ("accuracy", "ovr_accuracy", "sensitivity", "specificity",
                "precision", "f1")


@dataclass(frozen=True)
class ConfusionMatrix:
    """K x K counts; rows are true classes, columns predicted."""

    counts: np.ndarray
    labels: tuple

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=int)
        k = len(self.labels)
        if counts.shape != (k, k):
            raise ValueError("counts must be (K, K) matching labels")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_predictions(cls, y_true, y_pred, labels) -> "ConfusionMatrix":
        labels = tuple(labels)
        index = {label: i for i, label in enumerate(labels)}
        counts = np.zeros((len(labels), len(labels)), dtype=int)
        for t, p in zip(y_true, y_pred):
            counts[index[t], index[p]] += 1
        return cls(counts=counts, labels=labels)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def ovr(self, k: int):
        """One-vs-rest (TP, TN, FP, FN) for class index k."""
        tp = int(self.counts[k, k])
        fn = int(self.counts[k].sum()) - tp
        fp = int(self.counts[:, k].sum()) - tp
        tn = self.total - tp - fn - fp
        return tp, tn, fp, fn


@dataclass(frozen=True)
class Metrics:
    """Per-class one-vs-rest scores plus their unweighted macro averages.

    `accuracy` is the plain multiclass hit rate (trace/total); the one-vs-rest
    average of per-class accuracies is reported separately as `ovr_accuracy`
    since the two conventions differ a lot on many-class problems.  0/0 cells
    are defined as 0 and listed in `undefined` as (metric, class_index) pairs.
    """

    accuracy: float
    per_class_accuracy: np.ndarray
    sensitivity: np.ndarray
    specificity: np.ndarray
    precision: np.ndarray
    f1: np.ndarray
    undefined: tuple = ()

    @property
    def ovr_accuracy(self) -> float:
        return float(self.per_class_accuracy.mean())

    @property
    def macro_sensitivity(self) -> float:
        return float(self.sensitivity.mean())

    @property
    def macro_specificity(self) -> float:
        return float(self.specificity.mean())

    @property
    def macro_precision(self) -> float:
        return float(self.precision.mean())

    @property
    def macro_f1(self) -> float:
        return float(self.f1.mean())

    def scalar(self, name: str) -> float:
        return {
            "accuracy": self.accuracy,
            "ovr_accuracy": self.ovr_accuracy,
            "sensitivity": self.macro_sensitivity,
            "specificity": self.macro_specificity,
            "precision": self.macro_precision,
            "f1": self.macro_f1,
        }[name]


def metrics(cm: ConfusionMatrix) -> Metrics:
    """Reduce a confusion matrix to the five scores, per class and macro."""
    if cm.total == 0:
        raise EmptyMatrix("confusion matrix has no observations")
    k = len(cm.labels)
    acc = np.empty(k)
    sens = np.empty(k)
    spec = np.empty(k)
    prec = np.empty(k)
    f1 = np.empty(k)
    undefined = []

    def ratio(num, den, metric, idx):
        if den == 0:
            undefined.append((metric, idx))
            return 0.0
        return num / den

    for i in range(k):
        tp, tn, fp, fn = cm.ovr(i)
        acc[i] = (tp + tn) / cm.total
        sens[i] = ratio(tp, tp + fn, "sensitivity", i)
        spec[i] = ratio(tn, tn + fp, "specificity", i)
        prec[i] = ratio(tp, tp + fp, "precision", i)
        f1[i] = ratio(2.0 * prec[i] * sens[i], prec[i] + sens[i], "f1", i)
    return Metrics(
        accuracy=float(np.trace(cm.counts)) / cm.total,
        per_class_accuracy=acc,
        sensitivity=sens,
        specificity=spec,
        precision=prec,
        f1=f1,
        undefined=tuple(undefined),
    )


# ---------------------------------------------------------------------------
# cross-validation


@dataclass(frozen=True)
class FoldEval:
    subject: str
    fold_trial: int
    confusion: ConfusionMatrix
    scores: Metrics
    fitted: dict = None  # minmax bounds + projection when requested; not serialized


@dataclass(frozen=True)
class FoldFailure:
    subject: str
    fold_trial: int
    error: str


@dataclass(frozen=True)
class EvalReport:
    feature_set: str
    classifier: str
    window_ms: float
    overlap_ms: float
    snr_db: float
    seed: int
    config: dict
    folds: tuple
    failures: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        """metric -> (mean, std) across every (subject, fold) cell."""
        if not self.folds:
            return {name: (math.nan, math.nan) for name in METRIC_NAMES}
        out = {}
        for name in METRIC_NAMES:
            vals = np.asarray([f.scores.scalar(name) for f in self.folds])
            out[name] = (float(vals.mean()), float(vals.std()))
        return out

    def per_subject_means(self, metric: str) -> dict:
        """subject -> mean of a macro metric over its folds."""
        by_subject = {}
        for f in self.folds:
            by_subject.setdefault(f.subject, []).append(f.scores.scalar(metric))
        return {s: float(np.mean(v)) for s, v in sorted(by_subject.items())}

    def to_dict(self) -> dict:
        return {
            "feature_set": self.feature_set,
            "classifier": self.classifier,
            "window_ms": self.window_ms,
            "overlap_ms": self.overlap_ms,
            "snr_db": None if self.snr_db is None else (
                "inf" if math.isinf(self.snr_db) else self.snr_db
            ),
            "seed": self.seed,
            "config": self.config,
            "summary": {
                k: [None if math.isnan(u) else u for u in v]
                for k, v in self.summary().items()
            },
            "per_subject": {
                name: self.per_subject_means(name) for name in METRIC_NAMES
            },
            "folds": [
                {
                    "subject": f.subject,
                    "fold_trial": f.fold_trial,
                    "labels": list(f.confusion.labels),
                    "confusion": f.confusion.counts.tolist(),
                    "metrics": {
                        name: f.scores.scalar(name) for name in METRIC_NAMES
                    },
                    "per_class": {
                        "accuracy": f.scores.per_class_accuracy.tolist(),
                        "sensitivity": f.scores.sensitivity.tolist(),
                        "specificity": f.scores.specificity.tolist(),
                        "precision": f.scores.precision.tolist(),
                        "f1": f.scores.f1.tolist(),
                    },
                }
                for f in self.folds
            ],
            "failures": [
                {"subject": f.subject, "fold_trial": f.fold_trial, "error": f.error}
                for f in self.failures
            ],
        }

    def csv_rows(self) -> list:
        """Long-format rows: subject,fold,classifier,feature_set,window_ms,
        snr_db,metric,class,value."""
        snr = "" if self.snr_db is None else repr(float(self.snr_db))
        rows = []
        for f in self.folds:
            base = (
                f"{f.subject},{f.fold_trial},{self.classifier},"
                f"{self.feature_set},{self.window_ms!r},{snr}"
            )
            for name in ("accuracy", "ovr_accuracy"):
                rows.append(f"{base},{name},all,{f.scores.scalar(name)!r}")
            per_class = {
                "sensitivity": f.scores.sensitivity,
                "specificity": f.scores.specificity,
                "precision": f.scores.precision,
                "f1": f.scores.f1,
            }
            for name, values in per_class.items():
                for label, v in zip(f.confusion.labels, values):
                    rows.append(f"{base},{name},{label},{float(v)!r}")
                rows.append(f"{base},{name},macro,{f.scores.scalar(name)!r}")
        return rows


CSV_HEADER = "subject,fold,classifier,feature_set,window_ms,snr_db,metric,class,value"


def _movement_order(recordings) -> tuple:
    present = {rec.movement for rec in recordings}
    return tuple(m for m in MOVEMENTS if m in present)


def crossvalidate(
    recordings,
    feature_set: FeatureSetSpec,
    model_spec: ModelSpec,
    window_ms: float = 250.0,
    overlap_ms: float = 0.0,
    snr_db: float = None,
    filter_spec: FilterSpec = None,
    seed: int = 0,
    keep_fitted: bool = False,
) -> EvalReport:
    """Leave-one-trial-out evaluation over every subject in the dataset.

    When snr_db is given and finite, calibrated white noise is mixed into the
    raw recordings (seeded per subject/movement/trial) before filtering.  The
    no-mix sentinel (inf) is normalized to None so the emitted report is
    identical to a plain run.
    """
    filter_spec = filter_spec or FilterSpec()
    labels = _movement_order(recordings)
    if snr_db is not None and snr_db == NO_MIX:
        snr_db = None
    mixing = snr_db is not None

    by_subject = {}
    for rec in recordings:
        by_subject.setdefault(rec.subject_id, []).append(rec)

    folds, failures = [], []
    for subject in sorted(by_subject):
        feats, ys, trials = [], [], []
        for rec in by_subject[subject]:
            if mixing:
                rec = mix_awgn(
                    rec,
                    snr_db,
                    derive_seed(seed, "awgn", subject, rec.movement,
                                rec.trial, float(snr_db)),
                )
            rec = apply_filters(rec, filter_spec)
            windows = segment(rec, window_ms, overlap_ms)
            feats.append(extract_matrix(feature_set, windows))
            ys.extend([rec.movement] * len(windows))
            trials.extend([rec.trial] * len(windows))
        X = np.vstack(feats)
        y = np.asarray(ys)
        trial_ids = np.asarray(trials)

        for held_out in sorted(set(trial_ids.tolist())):
            train_mask = trial_ids != held_out
            test_mask = ~train_mask
            try:
                norm_train, bounds = normalize_features(X[train_mask])
                norm_test, _ = normalize_features(X[test_mask], bounds)
                projection = fit_ulda(norm_train, y[train_mask])
                model = train(
                    model_spec,
                    project(projection, norm_train),
                    y[train_mask],
                    classes=labels,
                )
                predicted = model.predict(project(projection, norm_test))
                cm = ConfusionMatrix.from_predictions(y[test_mask], predicted, labels)
                folds.append(
                    FoldEval(
                        subject=subject,
                        fold_trial=int(held_out),
                        confusion=cm,
                        scores=metrics(cm),
                        fitted=(
                            {"minmax": bounds, "projection": projection}
                            if keep_fitted
                            else None
                        ),
                    )
                )
            except EmgprError as exc:
                failures.append(
                    FoldFailure(
                        subject=subject,
                        fold_trial=int(held_out),
                        error=f"{type(exc).__name__}: {exc}",
                    )
                )

    return EvalReport(
        feature_set=feature_set.name,
        classifier=model_spec.kind,
        window_ms=float(window_ms),
        overlap_ms=float(overlap_ms),
        snr_db=None if snr_db is None else float(snr_db),
        seed=seed,
        config={
            "feature_set": feature_set.to_dict(),
            "model": model_spec.to_dict(),
            "filter": filter_spec.to_dict(),
            "window_ms": float(window_ms),
            "overlap_ms": float(overlap_ms),
            "snr_db": None if snr_db is None else (
                "inf" if math.isinf(snr_db) else float(snr_db)
            ),
            "seed": seed,
        },
        folds=tuple(folds),
        failures=tuple(failures),
    )


DEFAULT_WINDOW_SIZES = tuple(range(50, 351, 50))
DEFAULT_SNR_GRID = tuple(range(0, 21))


def sweep_window(recordings, feature_set, model_spec,
                 sizes=DEFAULT_WINDOW_SIZES, **kwargs) -> list:
    """One crossvalidate per window size."""
    return [
        crossvalidate(recordings, feature_set, model_spec,
                      window_ms=float(size), **kwargs)
        for size in sizes
    ]


def sweep_snr(recordings, feature_set, model_spec,
              snrs=DEFAULT_SNR_GRID, seed: int = 0, **kwargs) -> list:
    """One crossvalidate per SNR level, noise mixed before preprocessing."""
    return [
        crossvalidate(recordings, feature_set, model_spec,
                      snr_db=float(snr), seed=seed, **kwargs)
        for snr in snrs
    ]


# ---------------------------------------------------------------------------
# statistical comparison


def compare_groups(groups, n_comparisons: int = 1) -> dict:
    """One-way ANOVA across score groups with a Bonferroni-corrected p.

    Returns f_stat, p_value and bonferroni_p (p times the declared number of
    comparisons, capped at 1).
    """
    groups = [np.asarray(g, dtype=float) for g in groups]
    if len(groups) < 2:
        raise InsufficientGroups("need at least two groups")
    if any(len(g) == 0 for g in groups):
        raise InsufficientGroups("groups must be non-empty")
    if n_comparisons < 1:
        raise ValueError("n_comparisons must be >= 1")
    sizes = np.asarray([len(g) for g in groups])
    total_n = int(sizes.sum())
    k = len(groups)
    df_between = k - 1
    df_within = total_n - k
    if df_within < 1:
        raise InsufficientGroups("need more than one observation per group")
    grand = float(np.concatenate(groups).mean())
    group_means = np.asarray([float(g.mean()) for g in groups])
    ss_between = float(np.sum(sizes * (group_means - grand) ** 2))
    ss_within = float(sum(np.sum((g - m) ** 2) for g, m in zip(groups, group_means)))
    if ss_within == 0.0:
        f_stat = 0.0 if ss_between <= 1e-300 else math.inf
    else:
        f_stat = (ss_between / df_between) / (ss_within / df_within)
    if math.isinf(f_stat):
        p_value = 0.0
    else:
        p_value = float(special.fdtrc(df_between, df_within, f_stat))
    return {
        "f_stat": f_stat,
        "p_value": p_value,
        "bonferroni_p": min(1.0, p_value * n_comparisons),
        "df_between": df_between,
        "df_within": df_within,
    }
