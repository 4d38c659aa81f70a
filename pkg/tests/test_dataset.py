import math

import numpy as np
import pytest

from emgpr.dataset import (
    MOVEMENTS,
    NO_MIX,
    DatasetManifest,
    Recording,
    SyntheticSpec,
    estimate_snr,
    generate_synthetic,
    load_dataset,
    mix_awgn,
    save_dataset,
    separable_gain_grid,
)
from emgpr.errors import (
    ChannelCountMismatch,
    InvalidBand,
    MalformedRow,
    MissingFile,
    SignalBelowNoise,
    ZeroPowerChannel,
)


def small_spec(**overrides):
    defaults = dict(
        n_subjects=1, n_channels=2, n_movements=3, n_trials=2,
        duration_s=0.5, sample_rate_hz=2000.0, seed=1,
    )
    defaults.update(overrides)
    return SyntheticSpec(**defaults)


class TestEstimateSnr:
    def test_hand_value(self):
        assert estimate_snr(5.0, 3.0) == pytest.approx(
            20.0 * math.log10(4.0 / 3.0), abs=1e-9
        )
        assert estimate_snr(5.0, 3.0) == pytest.approx(2.4988, abs=5e-4)

    def test_equal_powers_give_zero_db(self):
        assert estimate_snr(math.sqrt(2.0), 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_signal_below_noise(self):
        with pytest.raises(SignalBelowNoise):
            estimate_snr(2.0, 3.0)
        with pytest.raises(SignalBelowNoise):
            estimate_snr(3.0, 0.0)


class TestMixAwgn:
    def _rec(self, n=10000, fs=2000.0):
        t = np.arange(n) / fs
        tone = math.sqrt(2.0) * np.sin(2 * math.pi * 97.0 * t)  # unit power
        return Recording("S1", "T", 1, fs, np.stack([tone, 0.5 * tone]))

    def test_zero_db_noise_power_matches_signal(self):
        rec = self._rec()
        mixed = mix_awgn(rec, 0.0, seed=3)
        for ch in range(2):
            noise = mixed.channels[ch] - rec.channels[ch]
            ratio_db = 10 * math.log10(
                np.mean(rec.channels[ch] ** 2) / np.mean(noise ** 2)
            )
            assert abs(ratio_db) < 0.2

    def test_twenty_db_on_unit_power_tone(self):
        mixed = mix_awgn(self._rec(), 20.0, seed=4)
        noise = mixed.channels[0] - self._rec().channels[0]
        assert np.var(noise) == pytest.approx(0.01, rel=0.05)

    def test_no_mix_sentinel_is_identity(self):
        rec = self._rec()
        assert mix_awgn(rec, NO_MIX, seed=5) is rec

    def test_requested_vs_measured_within_tolerance(self):
        # recover the SNR the way the estimator is meant to be used: RMS of
        # the noisy recording plus the RMS of the rest-state noise floor
        rng = np.random.default_rng(6)
        x = rng.standard_normal(12000)
        rec = Recording("S1", "T", 1, 2000.0, x[None, :])
        for snr in (0.0, 5.0, 10.0, 15.0, 20.0):
            mixed = mix_awgn(rec, snr, seed=int(snr))
            noise = mixed.channels[0] - x
            mixed_rms = float(np.sqrt(np.mean(mixed.channels[0] ** 2)))
            noise_rms = float(np.sqrt(np.mean(noise**2)))
            est = estimate_snr(mixed_rms, noise_rms)
            assert abs(est - snr) < 0.3

    def test_zero_power_channel(self):
        rec = Recording("S1", "T", 1, 2000.0, np.zeros((1, 100)))
        with pytest.raises(ZeroPowerChannel):
            mix_awgn(rec, 10.0, seed=0)

    def test_seeded_and_length_preserving(self):
        rec = self._rec()
        a = mix_awgn(rec, 5.0, seed=11)
        b = mix_awgn(rec, 5.0, seed=11)
        assert np.array_equal(a.channels, b.channels)
        assert a.channels.shape == rec.channels.shape


class TestSynthetic:
    def test_deterministic(self):
        spec = small_spec()
        a = generate_synthetic(spec)
        b = generate_synthetic(spec)
        assert len(a) == len(b) == 6
        for ra, rb in zip(a, b):
            assert np.array_equal(ra.channels, rb.channels)

    def test_zero_gain_row_gives_silent_movement(self):
        spec = small_spec(class_gain_matrix=((0.0, 0.0), (1.0, 1.0), (2.0, 1.0)))
        recs = generate_synthetic(spec)
        silent = [r for r in recs if r.movement == MOVEMENTS[0]]
        assert all(np.all(r.channels == 0.0) for r in silent)

    def test_channel_mean_near_zero(self):
        for rec in generate_synthetic(small_spec(duration_s=2.0)):
            for ch in rec.channels:
                n = len(ch)
                assert abs(ch.mean()) < 3.0 * ch.std() / math.sqrt(n)

    def test_invalid_band(self):
        with pytest.raises(InvalidBand):
            small_spec(band=(500.0, 20.0))
        with pytest.raises(InvalidBand):
            small_spec(band=(20.0, 1500.0))

    def test_duplicate_gain_rows_rejected(self):
        with pytest.raises(ValueError):
            small_spec(class_gain_matrix=((1.0, 1.0), (1.0, 1.0), (2.0, 1.0)))

    def test_tilt_validation(self):
        with pytest.raises(ValueError):
            small_spec(class_tilt_matrix=((0.5, 1.5), (0.1, 0.2), (0.3, 0.4)))
        with pytest.raises(InvalidBand):
            small_spec(
                class_tilt_matrix=((0.1, 0.2), (0.3, 0.4), (0.5, 0.6)),
                tilt_split_hz=(10.0, 250.0),
            )

    def test_gain_grid_rows_distinct_and_separated(self):
        grid = separable_gain_grid(10, 2, 2.0)
        assert len(set(grid)) == 10
        for i in range(10):
            for j in range(i + 1, 10):
                ratios = [
                    max(a, b) / min(a, b) for a, b in zip(grid[i], grid[j])
                ]
                assert max(ratios) >= 2.0

    def test_spec_roundtrip(self):
        spec = small_spec(
            class_tilt_matrix=((0.1, 0.2), (0.3, 0.4), (0.5, 0.6))
        )
        assert SyntheticSpec.from_dict(spec.to_dict()) == spec


class TestCsvIo:
    def _manifest(self, tmp_path, subjects=("S1",), movements=("T", "I"),
                  trials=2):
        return DatasetManifest(
            root_path=str(tmp_path),
            layout="two_channel_csv",
            subjects=list(subjects),
            movements=list(movements),
            trials_per_movement=trials,
            sample_rate_hz=2000.0,
            filename_template="{subject}_{movement}_t{trial}.csv",
        )

    def test_save_load_roundtrip_bit_exact(self, tmp_path):
        spec = small_spec(n_movements=2)
        recs = generate_synthetic(spec)
        manifest = self._manifest(tmp_path)
        save_dataset(recs, manifest)
        loaded = load_dataset(manifest)
        assert len(loaded) == len(recs)
        by_key = {(r.movement, r.trial): r for r in recs}
        for r in loaded:
            assert np.array_equal(
                r.channels, by_key[(r.movement, r.trial)].channels
            )

    def test_expected_count_for_full_protocol(self, tmp_path):
        spec = SyntheticSpec(
            n_subjects=1, n_channels=2, n_movements=10, n_trials=6,
            duration_s=0.1, sample_rate_hz=2000.0, seed=2,
        )
        recs = generate_synthetic(spec)
        manifest = self._manifest(tmp_path, movements=list(MOVEMENTS), trials=6)
        save_dataset(recs, manifest)
        assert len(load_dataset(manifest)) == 60

    def test_empty_subjects_gives_empty_list(self, tmp_path):
        manifest = self._manifest(tmp_path, subjects=())
        assert load_dataset(manifest) == []

    def test_missing_file(self, tmp_path):
        manifest = self._manifest(tmp_path)
        with pytest.raises(MissingFile) as err:
            load_dataset(manifest)
        assert "S1_T_t1.csv" in str(err.value)

    def test_malformed_row_names_file_and_line(self, tmp_path):
        path = tmp_path / "S1_T_t1.csv"
        path.write_text("0.1,0.2\n0.3,oops\n")
        manifest = self._manifest(tmp_path, movements=("T",), trials=2)
        (tmp_path / "S1_T_t2.csv").write_text("0.1,0.2\n")
        with pytest.raises(MalformedRow) as err:
            load_dataset(manifest)
        assert err.value.line_no == 2
        assert "oops" in str(err.value)

    def test_channel_count_mismatch(self, tmp_path):
        (tmp_path / "S1_T_t1.csv").write_text("0.1,0.2\n0.3\n")
        (tmp_path / "S1_T_t2.csv").write_text("0.1,0.2\n")
        manifest = self._manifest(tmp_path, movements=("T",), trials=2)
        with pytest.raises(ChannelCountMismatch):
            load_dataset(manifest)

    def test_whitespace_and_comma_tolerant(self, tmp_path):
        (tmp_path / "S1_T_t1.csv").write_text("0.1 0.2\n0.3,\t0.4\n")
        (tmp_path / "S1_T_t2.csv").write_text("1 2\n")
        manifest = self._manifest(tmp_path, movements=("T",), trials=2)
        recs = load_dataset(manifest)
        assert recs[0].channels.shape == (2, 2)
        assert recs[0].channels[1, 1] == 0.4

    def test_subject_subdirectories_without_placeholder(self, tmp_path):
        manifest = DatasetManifest(
            root_path=str(tmp_path),
            layout="two_channel_csv",
            subjects=["S1", "S2"],
            movements=["T"],
            trials_per_movement=2,
            sample_rate_hz=2000.0,
            filename_template="{movement}{trial}.csv",
        )
        for s in ("S1", "S2"):
            for t in (1, 2):
                p = tmp_path / s / f"T{t}.csv"
                p.parent.mkdir(exist_ok=True)
                p.write_text("0.5,0.25\n")
        assert len(load_dataset(manifest)) == 4

    def test_manifest_json_roundtrip(self, tmp_path):
        manifest = self._manifest(tmp_path)
        manifest.save(tmp_path / "manifest.json")
        again = DatasetManifest.load(tmp_path / "manifest.json")
        assert again == manifest

    def test_synthetic_layout_not_loadable(self, tmp_path):
        manifest = DatasetManifest(
            root_path=str(tmp_path), layout="synthetic", subjects=["S1"],
            movements=["T"], trials_per_movement=2, sample_rate_hz=2000.0,
            filename_template="{movement}{trial}.csv",
        )
        with pytest.raises(ValueError):
            load_dataset(manifest)


class TestRecording:
    def test_validation(self):
        with pytest.raises(ValueError):
            Recording("S1", "XX", 1, 2000.0, np.zeros((1, 10)))
        with pytest.raises(ValueError):
            Recording("S1", "T", 0, 2000.0, np.zeros((1, 10)))
        with pytest.raises(ValueError):
            Recording("S1", "T", 1, -1.0, np.zeros((1, 10)))
        with pytest.raises(ValueError):
            Recording("S1", "T", 1, 2000.0, np.zeros(10))
