"""Time-domain feature catalog and named feature-set registry.

All features map one window channel (a 1-D float array) to one scalar.  The
catalog covers the classic amplitude/frequency surrogates (MAV, WL, ZC, SSC,
WAMP, ...), autoregressive coefficients, the power-spectrum moment
descriptors, and the two log-compressed amplitude features LMAV and NSV that
sharpen discrimination between weak activations.

Log-type features clamp their argument at ``EPS`` so every catalog entry is
finite on any input, including all-zero windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import UnknownFeature, WindowTooShort
from .preprocess import Window

EPS = 1e-12

#: Catalog order is the tie-break order used by forward selection.
CATALOG = (
    "MAV", "IEMG", "WL", "WAMP", "ZC", "SSC", "VAR", "RMS", "LOG",
    "DAMV", "DASDV", "MYOP", "SKW", "MOB", "COM", "MFL",
    "AR1", "AR2", "AR3", "AR4", "AR5", "AR6",
    "M0", "M2", "M4", "IRREGULARITY_FACTOR", "SPARSENESS", "WL_RATIO",
    "COV", "TKEO", "LMAV", "NSV",
)

_TDPSD_IDS = ("M0", "M2", "M4", "SPARSENESS", "IRREGULARITY_FACTOR", "WL_RATIO")


@dataclass(frozen=True)
class Thresholds:
    """Gate levels for the counting features, in signal units."""

    zc: float = 1e-4
    ssc: float = 1e-4
    wamp: float = 0.02
    myop: float = 0.016

    def to_dict(self) -> dict:
        return {"zc": self.zc, "ssc": self.ssc, "wamp": self.wamp, "myop": self.myop}

    @classmethod
    def from_dict(cls, d: dict) -> "Thresholds":
        return cls(**d)


@dataclass(frozen=True)
class FeatureSetSpec:
    """A named, ordered list of per-channel features."""

    name: str
    features: tuple
    thresholds: Thresholds = field(default_factory=Thresholds)

    def __post_init__(self):
        if not self.features:
            raise ValueError("feature set must contain at least one feature")
        for fid in self.features:
            if fid not in CATALOG:
                raise UnknownFeature(f"unknown feature id {fid!r}")

    def __len__(self) -> int:
        return len(self.features)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "features": list(self.features),
            "thresholds": self.thresholds.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSetSpec":
        thresholds = Thresholds.from_dict(d.get("thresholds", {}))
        name = d["name"]
        if "features" in d and d["features"]:
            return cls(name=name, features=tuple(d["features"]), thresholds=thresholds)
        return replace(feature_set(name), thresholds=thresholds)


_REGISTRY = {
    "FS1": ("RMS", "AR1", "AR2", "AR3", "AR4", "AR5", "AR6"),
    "FS2": ("IEMG", "WL", "WAMP", "ZC", "SSC", "VAR"),
    "FS3": ("M0", "M2", "M4", "SPARSENESS", "IRREGULARITY_FACTOR", "WL_RATIO"),
    "FS4": ("M0", "M2", "M4", "IRREGULARITY_FACTOR", "SPARSENESS", "COV", "TKEO"),
    "PROPOSED": (
        "LMAV", "NSV", "WL", "WAMP", "SSC", "ZC", "MOB", "COM", "SKW",
        "AR1", "AR2", "AR3", "AR4",
    ),
}

FEATURE_SET_NAMES = tuple(_REGISTRY) + ("CUSTOM",)


def feature_set(name: str, features=None, thresholds: Thresholds = None) -> FeatureSetSpec:
    """Instantiate a registry set (FS1..FS4, PROPOSED) or a CUSTOM list."""
    thresholds = thresholds or Thresholds()
    key = name.upper()
    if key == "CUSTOM":
        if not features:
            raise ValueError("CUSTOM feature set needs an explicit feature list")
        return FeatureSetSpec("CUSTOM", tuple(features), thresholds)
    if key not in _REGISTRY:
        raise UnknownFeature(f"unknown feature set {name!r}")
    if features is not None:
        raise ValueError(f"{key} has a fixed feature list")
    return FeatureSetSpec(key, _REGISTRY[key], thresholds)


def with_lmav_nsv(base: FeatureSetSpec) -> FeatureSetSpec:
    """Augment a base set with LMAV and NSV for ablation comparisons."""
    return FeatureSetSpec(
        name="CUSTOM",
        features=tuple(base.features) + ("LMAV", "NSV"),
        thresholds=base.thresholds,
    )


# ---------------------------------------------------------------------------
# scalar features


def mav(x: np.ndarray) -> float:
    return float(np.mean(np.abs(x)))


def lmav(x: np.ndarray) -> float:
    """Log-compressed mean absolute value: ln sqrt(MAV), clamped at EPS."""
    return 0.5 * math.log(max(mav(x), EPS))


def nsv(x: np.ndarray) -> float:
    """Log RMS deviation between the window MAV and the sample cube roots."""
    a = np.abs(np.asarray(x, dtype=float))
    m = float(np.mean(a))
    msd = float(np.mean((m - np.cbrt(a)) ** 2))
    return 0.5 * math.log(max(msd, EPS))


def _check_len(fid: str, n: int, needed: int):
    if n < needed:
        raise WindowTooShort(fid, n, needed)


def ar_coefficients(x: np.ndarray, order: int) -> np.ndarray:
    """Yule-Walker AR coefficients a_1..a_p via Levinson-Durbin.

    Biased autocorrelation; convention x_t = sum_k a_k x_{t-k} + e_t.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    _check_len(f"AR{order}", n, 2 * order + 1)
    r = np.empty(order + 1)
    for lag in range(order + 1):
        r[lag] = float(np.dot(x[: n - lag], x[lag:])) / n
    if r[0] <= EPS:
        return np.zeros(order)
    a = np.zeros(order)
    err = r[0]
    for k in range(order):
        acc = r[k + 1] - float(np.dot(a[:k], r[k:0:-1]))
        kappa = acc / err
        a[:k] = a[:k] - kappa * a[:k][::-1]
        a[k] = kappa
        err *= 1.0 - kappa * kappa
        if err <= EPS:
            break
    return a


def tdpsd(x: np.ndarray) -> dict:
    """Spectral-moment descriptor family from signal derivatives.

    Root moments m0/m2/m4 come from the signal, its first and second
    difference; M0/M2/M4 are log power-normalized moments, the remaining
    three are scale-invariant shape ratios.
    """
    x = np.asarray(x, dtype=float)
    _check_len("TDPSD", len(x), 5)
    d1 = np.diff(x)
    d2 = np.diff(d1)
    m0 = math.sqrt(float(np.sum(x * x)))
    m2 = math.sqrt(float(np.sum(d1 * d1)))
    m4 = math.sqrt(float(np.sum(d2 * d2)))
    # power normalization flattens the dynamic range before the log
    m0n = m0 ** 0.1 / 0.1
    m2n = m2 ** 0.1 / 0.1
    m4n = m4 ** 0.1 / 0.1
    wl_d1 = float(np.sum(np.abs(np.diff(d1))))
    wl_d2 = float(np.sum(np.abs(np.diff(d2))))
    return {
        "M0": math.log(m0n + EPS),
        "M2": math.log(abs(m0n - m2n) + EPS),
        "M4": math.log(abs(m0n - m4n) + EPS),
        "SPARSENESS": math.log(m0 / (math.sqrt(abs(m0 - m2) * abs(m0 - m4)) + EPS) + EPS),
        "IRREGULARITY_FACTOR": math.log(m2 / (math.sqrt(m0 * m4) + EPS) + EPS),
        "WL_RATIO": math.log(wl_d1 / (wl_d2 + EPS) + EPS),
    }


def compute_feature(fid: str, x: np.ndarray, thresholds: Thresholds = None) -> float:
    """Evaluate one catalog feature on one window channel."""
    th = thresholds or Thresholds()
    x = np.asarray(x, dtype=float)
    n = len(x)
    _check_len(fid, n, 1)

    if fid == "MAV":
        return mav(x)
    if fid == "IEMG":
        return float(np.sum(np.abs(x)))
    if fid == "WL":
        _check_len(fid, n, 2)
        return float(np.sum(np.abs(np.diff(x))))
    if fid == "WAMP":
        _check_len(fid, n, 2)
        return float(np.count_nonzero(np.abs(np.diff(x)) > th.wamp))
    if fid == "ZC":
        _check_len(fid, n, 2)
        sign_change = x[:-1] * x[1:] < 0
        big_enough = np.abs(x[:-1] - x[1:]) >= th.zc
        return float(np.count_nonzero(sign_change & big_enough))
    if fid == "SSC":
        _check_len(fid, n, 3)
        prod = (x[1:-1] - x[:-2]) * (x[1:-1] - x[2:])
        return float(np.count_nonzero(prod > th.ssc))
    if fid == "VAR":
        _check_len(fid, n, 2)
        return float(np.var(x, ddof=1))
    if fid == "RMS":
        return math.sqrt(float(np.mean(x * x)))
    if fid == "LOG":
        return math.exp(float(np.mean(np.log(np.abs(x) + EPS))))
    if fid == "DAMV":
        _check_len(fid, n, 2)
        return float(np.mean(np.abs(np.diff(x))))
    if fid == "DASDV":
        _check_len(fid, n, 2)
        return math.sqrt(float(np.mean(np.diff(x) ** 2)))
    if fid == "MYOP":
        return float(np.count_nonzero(np.abs(x) > th.myop)) / n
    if fid == "SKW":
        _check_len(fid, n, 3)
        m2c = float(np.var(x))
        if m2c < EPS:
            return 0.0
        m3c = float(np.mean((x - np.mean(x)) ** 3))
        g1 = m3c / m2c ** 1.5
        return g1 * math.sqrt(n * (n - 1)) / (n - 2)
    if fid == "MOB":
        _check_len(fid, n, 3)
        v = float(np.var(x))
        if v < EPS:
            return 0.0
        return math.sqrt(float(np.var(np.diff(x))) / v)
    if fid == "COM":
        _check_len(fid, n, 4)
        m_sig = compute_feature("MOB", x, th)
        if m_sig == 0.0:
            return 0.0
        return compute_feature("MOB", np.diff(x), th) / m_sig
    if fid == "MFL":
        _check_len(fid, n, 2)
        return math.log10(max(math.sqrt(float(np.sum(np.diff(x) ** 2))), EPS))
    if fid.startswith("AR"):
        order = int(fid[2:])
        return float(ar_coefficients(x, order)[-1])
    if fid in _TDPSD_IDS:
        return tdpsd(x)[fid]
    if fid == "COV":
        _check_len(fid, n, 2)
        return float(np.std(x, ddof=1)) / (abs(float(np.mean(x))) + EPS)
    if fid == "TKEO":
        _check_len(fid, n, 3)
        return float(np.mean(x[1:-1] ** 2 - x[:-2] * x[2:]))
    if fid == "LMAV":
        return lmav(x)
    if fid == "NSV":
        return nsv(x)
    raise UnknownFeature(f"unknown feature id {fid!r}")


# ---------------------------------------------------------------------------
# window-level extraction


@dataclass(frozen=True)
class FeatureVector:
    """Channel-major feature values for one window plus its provenance."""

    values: np.ndarray
    meta: tuple  # (subject, movement, trial, window_index)
    set_name: str


def _channel_features(set_spec: FeatureSetSpec, x: np.ndarray) -> list:
    """Evaluate a feature list on one channel, sharing grouped fits.

    AR lags present in the set share one model whose order is the largest
    requested lag (a set asking for AR1..AR4 reads all four coefficients off
    a single 4th-order fit); the six spectral-moment descriptors share one
    pass as well.
    """
    th = set_spec.thresholds
    ar_lags = [int(f[2:]) for f in set_spec.features if f.startswith("AR")]
    ar = ar_coefficients(x, max(ar_lags)) if ar_lags else None
    moments = tdpsd(x) if any(f in _TDPSD_IDS for f in set_spec.features) else None

    out = []
    for fid in set_spec.features:
        if fid.startswith("AR"):
            out.append(float(ar[int(fid[2:]) - 1]))
        elif fid in _TDPSD_IDS:
            out.append(moments[fid])
        else:
            out.append(compute_feature(fid, x, th))
    return out


def extract(set_spec: FeatureSetSpec, window: Window) -> FeatureVector:
    """Extract a feature set from every channel of a window (channel-major)."""
    values = []
    for ch in range(window.samples.shape[0]):
        values.extend(_channel_features(set_spec, window.samples[ch]))
    return FeatureVector(
        values=np.asarray(values, dtype=float),
        meta=window.meta,
        set_name=set_spec.name,
    )


def extract_matrix(set_spec: FeatureSetSpec, windows) -> np.ndarray:
    """Stack `extract` over many windows into an (n_windows, d) matrix."""
    return np.asarray(
        [extract(set_spec, w).values for w in windows], dtype=float
    ).reshape(len(windows), -1)


def feature_column_names(set_spec: FeatureSetSpec, n_channels: int) -> list:
    """Channel-major column labels, e.g. MAV_ch1 ... NSV_ch2."""
    return [
        f"{fid}_ch{ch + 1}"
        for ch in range(n_channels)
        for fid in set_spec.features
    ]
