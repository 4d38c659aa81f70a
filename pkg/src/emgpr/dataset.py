"""EMG recordings: CSV ingestion, synthetic generation, AWGN mixing, SNR.

A Recording holds one (subject, movement, trial) triple as an
(n_channels, n_samples) float array plus its sampling rate.  The ten
movement labels cover five single-finger and five combined gestures.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy import signal

from .errors import (
    ChannelCountMismatch,
    InvalidBand,
    MalformedRow,
    MissingFile,
    SignalBelowNoise,
    ZeroPowerChannel,
)
from .seeding import derive_seed

MOVEMENTS = ("T", "I", "M", "R", "L", "TI", "TM", "TR", "TL", "HC")

#: Sentinel for "do not mix any noise".
NO_MIX = math.inf


@dataclass(frozen=True)
class Recording:
    subject_id: str
    movement: str
    trial: int
    sample_rate_hz: float
    channels: np.ndarray  # (n_channels, n_samples)
    units: str = "V"

    def __post_init__(self):
        if self.movement not in MOVEMENTS:
            raise ValueError(f"unknown movement label {self.movement!r}")
        if self.trial < 1:
            raise ValueError("trial index starts at 1")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        ch = np.asarray(self.channels, dtype=float)
        if ch.ndim != 2 or ch.shape[1] < 1:
            raise ValueError("channels must be a (n_channels, n_samples) matrix")
        object.__setattr__(self, "channels", ch)

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    def with_channels(self, channels: np.ndarray) -> "Recording":
        return replace(self, channels=channels)


@dataclass(frozen=True)
class DatasetManifest:
    """Where a file-backed dataset lives and how its files are named.

    filename_template is formatted with {subject}, {movement} and {trial};
    when it lacks a {subject} placeholder and several subjects are declared,
    files are looked up under a per-subject directory instead.
    """

    root_path: str
    layout: str
    subjects: list
    movements: list
    trials_per_movement: int
    sample_rate_hz: float
    filename_template: str

    def __post_init__(self):
        if self.layout not in ("two_channel_csv", "synthetic"):
            raise ValueError(f"unknown layout {self.layout!r}")
        if self.trials_per_movement < 2:
            raise ValueError("leave-one-trial-out needs >= 2 trials per movement")
        for m in self.movements:
            if m not in MOVEMENTS:
                raise ValueError(f"unknown movement label {m!r}")

    def file_path(self, subject: str, movement: str, trial: int) -> Path:
        name = self.filename_template.format(
            subject=subject, movement=movement, trial=trial
        )
        root = Path(self.root_path)
        if "{subject}" not in self.filename_template and len(self.subjects) > 1:
            return root / subject / name
        return root / name

    def to_dict(self) -> dict:
        return {
            "root_path": str(self.root_path),
            "layout": self.layout,
            "subjects": list(self.subjects),
            "movements": list(self.movements),
            "trials_per_movement": self.trials_per_movement,
            "sample_rate_hz": self.sample_rate_hz,
            "filename_template": self.filename_template,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        return cls(**d)

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _parse_csv(path: Path) -> np.ndarray:
    """Read a headerless numeric table, one column per channel.

    Tolerates comma and/or whitespace separation and blank lines.
    """
    rows = []
    expected = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            cells = line.replace(",", " ").split()
            if not cells:
                continue
            if expected is None:
                expected = len(cells)
            elif len(cells) != expected:
                raise ChannelCountMismatch(path, line_no, expected, len(cells))
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                bad = next(c for c in cells if not _is_number(c))
                raise MalformedRow(path, line_no, bad) from None
    if not rows:
        raise MalformedRow(path, 1, "<empty file>")
    return np.asarray(rows, dtype=float).T  # -> (n_channels, n_samples)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_dataset(manifest: DatasetManifest) -> list:
    """Load one Recording per (subject, movement, trial) the manifest declares."""
    if manifest.layout != "two_channel_csv":
        raise ValueError(
            "only file-backed manifests can be loaded; build synthetic data "
            "with generate_synthetic"
        )
    recordings = []
    for subject in manifest.subjects:
        for movement in manifest.movements:
            for trial in range(1, manifest.trials_per_movement + 1):
                path = manifest.file_path(subject, movement, trial)
                if not path.is_file():
                    raise MissingFile(path)
                channels = _parse_csv(path)
                recordings.append(
                    Recording(
                        subject_id=subject,
                        movement=movement,
                        trial=trial,
                        sample_rate_hz=manifest.sample_rate_hz,
                        channels=channels,
                    )
                )
    return recordings


def save_recording(rec: Recording, path) -> None:
    """Write one recording as headerless CSV (rows = samples, cols = channels).

    Floats are written with repr so a load round-trips bit-exactly.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = rec.channels.T
    with open(path, "w", encoding="utf-8") as fh:
        for row in cols:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def save_dataset(recordings: list, manifest: DatasetManifest) -> None:
    """Materialize recordings on disk per the manifest's filename template."""
    for rec in recordings:
        save_recording(rec, manifest.file_path(rec.subject_id, rec.movement, rec.trial))


# ---------------------------------------------------------------------------
# synthetic data


@dataclass(frozen=True)
class SyntheticSpec:
    """Seeded generator config for separable synthetic recordings.

    Every channel is band-limited Gaussian noise with unit RMS scaled by
    class_gain_matrix[movement][channel], so movements are at least
    amplitude-coded and the expected downstream behavior is known by
    construction.  With class_tilt_matrix set, each channel is additionally a
    class-specific mixture of a low and a high sub-band (weight = tilt), so
    classes also differ spectrally, the way distinct movements recruit
    different motor-unit populations; leave it None for classes whose only
    cue is channel amplitude.
    """

    n_subjects: int = 1
    n_channels: int = 2
    n_movements: int = 10
    n_trials: int = 6
    duration_s: float = 5.0
    sample_rate_hz: float = 2000.0
    class_gain_matrix: tuple = None
    band: tuple = (20.0, 500.0)
    class_tilt_matrix: tuple = None
    tilt_split_hz: tuple = None
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n_movements <= len(MOVEMENTS):
            raise ValueError(f"n_movements must be in 1..{len(MOVEMENTS)}")
        low, high = self.band
        if not 0 < low < high < self.sample_rate_hz / 2:
            raise InvalidBand(
                f"band {self.band} invalid for fs={self.sample_rate_hz}"
            )
        gains = self.class_gain_matrix
        if gains is None:
            gains = separable_gain_grid(self.n_movements, self.n_channels)
        gains = tuple(tuple(float(g) for g in row) for row in gains)
        if len(gains) != self.n_movements or any(
            len(r) != self.n_channels for r in gains
        ):
            raise ValueError("class_gain_matrix must be n_movements x n_channels")
        if len(set(gains)) != len(gains):
            raise ValueError("class_gain_matrix rows must be distinct")
        object.__setattr__(self, "class_gain_matrix", gains)

        tilt = self.class_tilt_matrix
        if tilt is not None:
            tilt = tuple(tuple(float(v) for v in row) for row in tilt)
            if len(tilt) != self.n_movements or any(
                len(r) != self.n_channels for r in tilt
            ):
                raise ValueError("class_tilt_matrix must be n_movements x n_channels")
            if any(not 0.0 <= v <= 1.0 for row in tilt for v in row):
                raise ValueError("tilt weights must lie in [0, 1]")
            splits = self.tilt_split_hz
            if splits is None:
                step = (high - low) / (self.n_channels + 1)
                splits = tuple(low + step * (c + 1) for c in range(self.n_channels))
            else:
                splits = tuple(float(v) for v in splits)
            if len(splits) != self.n_channels or any(
                not low < v < high for v in splits
            ):
                raise InvalidBand("tilt_split_hz must lie strictly inside band")
            object.__setattr__(self, "tilt_split_hz", splits)
        object.__setattr__(self, "class_tilt_matrix", tilt)

    def to_dict(self) -> dict:
        return {
            "n_subjects": self.n_subjects,
            "n_channels": self.n_channels,
            "n_movements": self.n_movements,
            "n_trials": self.n_trials,
            "duration_s": self.duration_s,
            "sample_rate_hz": self.sample_rate_hz,
            "class_gain_matrix": [list(r) for r in self.class_gain_matrix],
            "band": list(self.band),
            "class_tilt_matrix": (
                None
                if self.class_tilt_matrix is None
                else [list(r) for r in self.class_tilt_matrix]
            ),
            "tilt_split_hz": (
                None if self.tilt_split_hz is None else list(self.tilt_split_hz)
            ),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        d = dict(d)
        for key in ("class_gain_matrix", "class_tilt_matrix"):
            if d.get(key) is not None:
                d[key] = tuple(tuple(r) for r in d[key])
        for key in ("band", "tilt_split_hz"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        return cls(**d)


def separable_gain_grid(n_movements: int, n_channels: int, ratio: float = 2.0) -> tuple:
    """Gain rows on a geometric grid so adjacent classes differ >= ratio.

    With two channels the grid is 5 x 2 (primary channel sweeps five levels,
    secondary toggles between two), which keeps per-channel dynamic range
    moderate while every pair of rows stays distinguishable.
    """
    if n_channels >= 2:
        primary_levels = math.ceil(n_movements / 2)
        rows = []
        for m in range(n_movements):
            row = [1.0] * n_channels
            row[0] = ratio ** (m % primary_levels)
            row[1] = ratio ** (2 * (m // primary_levels))
            rows.append(tuple(row))
        return tuple(rows)
    return tuple((ratio ** m,) for m in range(n_movements))


def separable_tilt_matrix(n_movements: int, n_channels: int) -> tuple:
    """Spectral-tilt weights giving every class a distinct per-channel slope.

    Channel orderings are decorrelated by coprime strides so no two classes
    share a tilt signature even when their gains are close.
    """
    strides = [s for s in (1, 3, 7, 9, 11, 13, 17, 19) if
               math.gcd(s, n_movements) == 1]
    rows = []
    for m in range(n_movements):
        row = []
        for c in range(n_channels):
            stride = strides[c % len(strides)]
            level = (m * stride) % n_movements
            frac = level / (n_movements - 1) if n_movements > 1 else 0.5
            row.append(0.05 + 0.90 * frac)
        rows.append(tuple(row))
    return tuple(rows)


def separable_spec(
    n_subjects: int = 1,
    n_channels: int = 2,
    n_movements: int = 10,
    n_trials: int = 6,
    duration_s: float = 5.0,
    sample_rate_hz: float = 2000.0,
    gain_ratio: float = 2.0,
    seed: int = 0,
) -> SyntheticSpec:
    """The canonical strongly-separable dataset spec (gains + spectral tilt)."""
    return SyntheticSpec(
        n_subjects=n_subjects,
        n_channels=n_channels,
        n_movements=n_movements,
        n_trials=n_trials,
        duration_s=duration_s,
        sample_rate_hz=sample_rate_hz,
        class_gain_matrix=separable_gain_grid(n_movements, n_channels, gain_ratio),
        class_tilt_matrix=separable_tilt_matrix(n_movements, n_channels),
        tilt_split_hz=tuple(
            min(150.0 + 100.0 * c, 0.8 * sample_rate_hz / 2.0)
            for c in range(n_channels)
        ),
        seed=seed,
    )


def generate_synthetic(spec: SyntheticSpec) -> list:
    """Deterministically synthesize recordings; same spec -> identical bits."""
    low, high = spec.band
    nyq = spec.sample_rate_hz / 2.0
    sos_band = signal.butter(4, [low / nyq, high / nyq], btype="bandpass",
                             output="sos")
    sos_pairs = None
    if spec.class_tilt_matrix is not None:
        sos_pairs = [
            (
                signal.butter(4, [low / nyq, split / nyq], btype="bandpass",
                              output="sos"),
                signal.butter(4, [split / nyq, high / nyq], btype="bandpass",
                              output="sos"),
            )
            for split in spec.tilt_split_hz
        ]

    def unit_rms(x):
        rms = math.sqrt(float(np.mean(x * x)))
        return x / rms if rms > 0 else x

    n = int(round(spec.duration_s * spec.sample_rate_hz))
    recordings = []
    for s in range(spec.n_subjects):
        subject = f"S{s + 1}"
        for m in range(spec.n_movements):
            movement = MOVEMENTS[m]
            gains = spec.class_gain_matrix[m]
            for t in range(1, spec.n_trials + 1):
                rng = np.random.default_rng(
                    derive_seed(spec.seed, "synth", subject, movement, t)
                )
                channels = np.empty((spec.n_channels, n))
                for c in range(spec.n_channels):
                    white = rng.standard_normal(n)
                    if sos_pairs is None:
                        x = unit_rms(signal.sosfilt(sos_band, white))
                    else:
                        sos_low, sos_high = sos_pairs[c]
                        tilt = spec.class_tilt_matrix[m][c]
                        x = unit_rms(
                            tilt * unit_rms(signal.sosfilt(sos_low, white))
                            + (1.0 - tilt)
                            * unit_rms(signal.sosfilt(sos_high, white))
                        )
                    channels[c] = gains[c] * x
                recordings.append(
                    Recording(
                        subject_id=subject,
                        movement=movement,
                        trial=t,
                        sample_rate_hz=spec.sample_rate_hz,
                        channels=channels,
                    )
                )
    return recordings


# ---------------------------------------------------------------------------
# noise mixing and SNR


def mix_awgn(rec: Recording, snr_db: float, seed: int) -> Recording:
    """Add seeded white Gaussian noise at a requested SNR.

    The noise power is derived from the measured power of each channel
    (noise_power = mean(x^2) / 10^(snr_db/10)), matching the convention of
    the usual 'measured'-mode mixer.  snr_db = inf returns the input as is.
    """
    if snr_db == NO_MIX:
        return rec
    rng = np.random.default_rng(seed)
    out = np.empty_like(rec.channels)
    for ch in range(rec.n_channels):
        x = rec.channels[ch]
        power = float(np.mean(x * x))
        if power <= 0.0:
            raise ZeroPowerChannel(f"channel {ch} has zero power")
        noise_power = power / 10.0 ** (snr_db / 10.0)
        out[ch] = x + rng.normal(0.0, math.sqrt(noise_power), x.shape)
    return rec.with_channels(out)


def estimate_snr(active_rms: float, noise_rms: float) -> float:
    """SNR in dB by power subtraction of the rest-state noise floor."""
    if noise_rms <= 0:
        raise SignalBelowNoise("noise_rms must be positive")
    if active_rms <= noise_rms:
        raise SignalBelowNoise(
            f"active RMS {active_rms} does not exceed noise RMS {noise_rms}"
        )
    return 20.0 * math.log10(
        math.sqrt(active_rms**2 - noise_rms**2) / noise_rms
    )
