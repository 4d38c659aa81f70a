import math

import numpy as np
import pytest

from emgpr.errors import UnknownFeature, WindowTooShort
from emgpr.features import (
    CATALOG,
    FeatureSetSpec,
    Thresholds,
    compute_feature,
    extract,
    feature_set,
    lmav,
    nsv,
    with_lmav_nsv,
)
from emgpr.preprocess import Window

from reference_features import ref_feature

E2 = math.e ** 2


def make_window(samples, meta=("S1", "T", 1, 0), window_ms=250.0):
    return Window(samples=np.asarray(samples, dtype=float), meta=meta,
                  window_ms=window_ms)


def random_windows(n, rng):
    """Mixed lengths and amplitude scales, occasional weak signals."""
    for _ in range(n):
        length = int(rng.integers(50, 200))
        scale = 10.0 ** rng.uniform(-3, 1)
        yield scale * rng.standard_normal(length)


class TestClosedForms:
    def test_lmav_all_ones(self):
        assert lmav(np.array([1.0, 1.0, 1.0, 1.0])) == 0.0

    def test_lmav_e_squared(self):
        assert lmav(np.array([E2, E2, -E2, -E2])) == pytest.approx(1.0, abs=1e-12)

    def test_lmav_zero_window_clamps(self):
        assert lmav(np.zeros(4)) == pytest.approx(math.log(1e-6), abs=1e-9)

    def test_lmav_scale_identity_exact(self):
        # powers of two keep MAV arithmetic exact, so the identity is bit-exact
        x = np.array([1.0, 1.0, 1.0, 1.0])
        assert lmav(0.25 * x) - lmav(x) == math.log(math.sqrt(0.25))

    def test_lmav_scale_identity_random(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            x = rng.standard_normal(64) * 10.0 ** rng.uniform(-2, 2)
            a = float(rng.uniform(0.05, 0.95))
            got = lmav(a * x) - lmav(x)
            assert got == pytest.approx(math.log(math.sqrt(a)), abs=1e-12)

    def test_lmav_monotone_in_mav(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            x = rng.standard_normal(32)
            y = rng.standard_normal(32)
            mav_x, mav_y = np.mean(np.abs(x)), np.mean(np.abs(y))
            if mav_x < mav_y:
                assert lmav(x) < lmav(y)
            elif mav_y < mav_x:
                assert lmav(y) < lmav(x)

    def test_nsv_eights(self):
        assert nsv(np.array([8.0, 8.0, 8.0, 8.0])) == pytest.approx(
            math.log(6.0), abs=1e-12
        )

    def test_nsv_zero_deviation_clamps(self):
        # unit samples: MAV equals every cube root, deviation collapses
        assert nsv(np.ones(4)) == pytest.approx(math.log(1e-6), abs=1e-9)

    def test_nsv_zero_one(self):
        assert nsv(np.array([0.0, 1.0])) == pytest.approx(math.log(0.5), abs=1e-12)

    def test_lmav_nsv_permutation_invariant(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(50)
        shuffled = rng.permutation(x)
        assert lmav(shuffled) == pytest.approx(lmav(x), rel=1e-12)
        assert nsv(shuffled) == pytest.approx(nsv(x), rel=1e-12)


class TestCatalogOracle:
    def test_every_feature_matches_bruteforce(self):
        th = Thresholds()
        rng = np.random.default_rng(12345)
        windows = list(random_windows(1000, rng))
        for fid in CATALOG:
            for x in windows:
                got = compute_feature(fid, x, th)
                want = ref_feature(fid, x.tolist(), th)
                assert got == pytest.approx(want, rel=1e-9, abs=1e-12), fid

    def test_hand_checks(self):
        th = Thresholds(zc=0.0)
        assert compute_feature("ZC", np.array([1.0, -1, 1, -1, 1]), th) == 4
        assert compute_feature("SKW", np.array([-2.0, -1, 0, 1, 2])) == 0.0

    def test_ar1_consistency_on_simulated_process(self):
        rng = np.random.default_rng(7)
        x = np.zeros(4000)
        for t in range(1, 4000):
            x[t] = 0.9 * x[t - 1] + rng.standard_normal()
        assert compute_feature("AR1", x) == pytest.approx(0.9, abs=0.05)

    def test_tdpsd_scale_sensitivity(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal(500)
        th = Thresholds()
        for a in (0.1, 0.37, 3.0):
            for fid in ("IRREGULARITY_FACTOR", "WL_RATIO"):
                assert compute_feature(fid, a * x, th) == pytest.approx(
                    compute_feature(fid, x, th), abs=1e-9
                )

    def test_tdpsd_zero_window_finite(self):
        th = Thresholds()
        values = [
            compute_feature(fid, np.zeros(16), th)
            for fid in ("M0", "M2", "M4", "SPARSENESS", "IRREGULARITY_FACTOR",
                        "WL_RATIO")
        ]
        assert all(np.isfinite(values))
        assert len(set(values)) == 1

    def test_window_too_short(self):
        with pytest.raises(WindowTooShort):
            compute_feature("AR6", np.ones(10))
        with pytest.raises(WindowTooShort):
            compute_feature("SSC", np.ones(2))

    def test_unknown_feature(self):
        with pytest.raises(UnknownFeature):
            compute_feature("MNF", np.ones(8))


class TestFeatureSets:
    def test_registry_contents(self):
        assert feature_set("FS1").features == (
            "RMS", "AR1", "AR2", "AR3", "AR4", "AR5", "AR6")
        assert feature_set("FS2").features == (
            "IEMG", "WL", "WAMP", "ZC", "SSC", "VAR")
        assert feature_set("FS3").features == (
            "M0", "M2", "M4", "SPARSENESS", "IRREGULARITY_FACTOR", "WL_RATIO")
        assert feature_set("FS4").features == (
            "M0", "M2", "M4", "IRREGULARITY_FACTOR", "SPARSENESS", "COV", "TKEO")
        assert feature_set("PROPOSED").features == (
            "LMAV", "NSV", "WL", "WAMP", "SSC", "ZC", "MOB", "COM", "SKW",
            "AR1", "AR2", "AR3", "AR4")

    def test_catalog_size(self):
        assert len(CATALOG) == 32

    @pytest.mark.parametrize("name,per_channel", [
        ("FS1", 7), ("FS2", 6), ("FS3", 6), ("FS4", 7), ("PROPOSED", 13),
    ])
    def test_extract_lengths_two_channels(self, name, per_channel):
        rng = np.random.default_rng(0)
        window = make_window(rng.standard_normal((2, 500)))
        vec = extract(feature_set(name), window)
        assert len(vec.values) == per_channel * 2
        assert np.all(np.isfinite(vec.values))

    def test_extract_channel_major_order(self):
        rng = np.random.default_rng(1)
        samples = rng.standard_normal((2, 300))
        spec = feature_set("CUSTOM", ["MAV", "RMS"])
        vec = extract(spec, make_window(samples))
        th = spec.thresholds
        assert vec.values[0] == compute_feature("MAV", samples[0], th)
        assert vec.values[1] == compute_feature("RMS", samples[0], th)
        assert vec.values[2] == compute_feature("MAV", samples[1], th)
        assert vec.values[3] == compute_feature("RMS", samples[1], th)

    def test_grouped_ar_shares_one_model_fit(self):
        # a set asking for AR1..AR4 reads all lags off a single 4th-order fit
        from emgpr.features import ar_coefficients

        rng = np.random.default_rng(2)
        samples = rng.standard_normal((1, 400))
        spec = feature_set("CUSTOM", ["AR1", "AR2", "AR3", "AR4"])
        vec = extract(spec, make_window(samples))
        assert np.allclose(vec.values, ar_coefficients(samples[0], 4))

    def test_with_lmav_nsv_extends_any_base(self):
        rng = np.random.default_rng(6)
        window = make_window(rng.standard_normal((2, 200)))
        for name in ("FS1", "FS2", "FS3", "FS4"):
            base = feature_set(name)
            bigger = with_lmav_nsv(base)
            assert bigger.features == base.features + ("LMAV", "NSV")
            assert bigger.name == "CUSTOM"
            # vectors grow by exactly two values per channel
            assert len(extract(bigger, window).values) == \
                len(extract(base, window).values) + 2 * 2

    def test_custom_requires_features(self):
        with pytest.raises(ValueError):
            feature_set("CUSTOM")

    def test_spec_roundtrip(self):
        spec = feature_set("PROPOSED", thresholds=Thresholds(wamp=0.05))
        again = FeatureSetSpec.from_dict(spec.to_dict())
        assert again == spec
