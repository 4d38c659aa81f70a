import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from emgpr import SyntheticSpec, generate_synthetic, separable_gain_grid, separable_spec


@pytest.fixture(scope="session")
def separable_recordings():
    """The strongly separable 10-class dataset (gains + spectral tilt)."""
    return generate_synthetic(separable_spec(seed=42))


@pytest.fixture(scope="session")
def amplitude_recordings():
    """Amplitude-only classes at moderate contrast; small and quick."""
    spec = SyntheticSpec(
        n_subjects=1,
        n_channels=2,
        n_movements=5,
        n_trials=3,
        duration_s=2.0,
        sample_rate_hz=2000.0,
        class_gain_matrix=separable_gain_grid(5, 2, 2.0),
        seed=9,
    )
    return generate_synthetic(spec)
