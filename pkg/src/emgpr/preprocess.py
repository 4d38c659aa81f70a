"""Digital filtering, windowing and min-max feature normalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .dataset import Recording
from .errors import NyquistViolation, WindowLongerThanTrial

MIN_WINDOW_SAMPLES = 8


@dataclass(frozen=True)
class FilterSpec:
    """Bandpass + notch cascade parameters.

    The bandpass is a Butterworth biquad cascade, the notch a single IIR
    biquad; both are applied causally in a single pass so the chain stays
    usable in a streaming/prosthesis setting.
    """

    band_low_hz: float = 20.0
    band_high_hz: float = 500.0
    notch_hz: float = 50.0
    notch_q: float = 30.0
    order: int = 4

    def __post_init__(self):
        if not 0 < self.band_low_hz < self.band_high_hz:
            raise ValueError("need 0 < band_low_hz < band_high_hz")
        if not self.band_low_hz <= self.notch_hz <= self.band_high_hz:
            raise ValueError("notch_hz must lie within the passband")
        if self.order < 1:
            raise ValueError("order must be >= 1")

    def to_dict(self) -> dict:
        return {
            "band_low_hz": self.band_low_hz,
            "band_high_hz": self.band_high_hz,
            "notch_hz": self.notch_hz,
            "notch_q": self.notch_q,
            "order": self.order,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FilterSpec":
        return cls(**d)


@dataclass(frozen=True)
class Window:
    """One fixed-length analysis segment with provenance.

    samples: (n_channels, n) array
    meta: (subject_id, movement, trial, window_index)
    """

    samples: np.ndarray
    meta: tuple
    window_ms: float

    def __post_init__(self):
        if self.samples.ndim != 2:
            raise ValueError("window samples must be (n_channels, n)")
        if self.samples.shape[1] < MIN_WINDOW_SAMPLES:
            raise ValueError(
                f"window needs >= {MIN_WINDOW_SAMPLES} samples, "
                f"got {self.samples.shape[1]}"
            )

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]


def design_filters(spec: FilterSpec, sample_rate_hz: float):
    """Return (bandpass sos, notch (b, a)) for the given rate."""
    nyq = sample_rate_hz / 2.0
    if spec.band_high_hz >= nyq:
        raise NyquistViolation(
            f"band edge {spec.band_high_hz} Hz >= Nyquist {nyq} Hz"
        )
    sos = signal.butter(
        spec.order,
        [spec.band_low_hz / nyq, spec.band_high_hz / nyq],
        btype="bandpass",
        output="sos",
    )
    b_notch, a_notch = signal.iirnotch(spec.notch_hz, spec.notch_q, fs=sample_rate_hz)
    return sos, (b_notch, a_notch)


def apply_filters(rec: Recording, spec: FilterSpec = None) -> Recording:
    """Causal bandpass + notch on every channel; length is preserved."""
    spec = spec or FilterSpec()
    sos, (b_notch, a_notch) = design_filters(spec, rec.sample_rate_hz)
    out = np.empty_like(rec.channels)
    for ch in range(rec.channels.shape[0]):
        y = signal.sosfilt(sos, rec.channels[ch])
        out[ch] = signal.lfilter(b_notch, a_notch, y)
    return rec.with_channels(out)


def segment(rec: Recording, window_ms: float, overlap_ms: float = 0.0) -> list:
    """Slice a recording into fixed-length windows.

    Disjoint when overlap_ms = 0; a trailing remainder shorter than one
    window is dropped.  Each window carries (subject, movement, trial, index).
    """
    if window_ms <= 0:
        raise ValueError("window_ms must be positive")
    if not 0 <= overlap_ms < window_ms:
        raise ValueError("need 0 <= overlap_ms < window_ms")
    n = int(round(window_ms * rec.sample_rate_hz / 1000.0))
    step = n - int(round(overlap_ms * rec.sample_rate_hz / 1000.0))
    n_samples = rec.channels.shape[1]
    if n > n_samples:
        raise WindowLongerThanTrial(
            f"{window_ms} ms window ({n} samples) exceeds trial length {n_samples}"
        )
    windows = []
    count = (n_samples - n) // step + 1
    for i in range(count):
        start = i * step
        windows.append(
            Window(
                samples=rec.channels[:, start : start + n].copy(),
                meta=(rec.subject_id, rec.movement, rec.trial, i),
                window_ms=window_ms,
            )
        )
    return windows


@dataclass(frozen=True)
class MinMax:
    """Per-column bounds fitted on training data."""

    mins: np.ndarray
    maxs: np.ndarray


def normalize_features(matrix: np.ndarray, fitted: MinMax = None):
    """Column-wise min-max scaling to [0, 1].

    With fitted bounds (train-time fit) the same bounds are reused and the
    result is clipped to [0, 1]; a degenerate column (max == min) maps to 0.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        raise ValueError("empty feature matrix")
    if fitted is None:
        fitted = MinMax(mins=matrix.min(axis=0), maxs=matrix.max(axis=0))
        clip = False
    else:
        clip = True
    span = fitted.maxs - fitted.mins
    safe = np.where(span > 0, span, 1.0)
    out = (matrix - fitted.mins) / safe
    out[:, span <= 0] = 0.0
    if clip:
        out = np.clip(out, 0.0, 1.0)
    return out, fitted
