import numpy as np
import pytest

from fujita.grid import make_grid
from fujita.kernels import (
    ResolutionWarning, _chirp_sum, kernel_min, kernel_profile, verify_kernel_scaling,
)


def test_resolution_warning_on_coarse_grid():
    g = make_grid(1, 40.0, 64)
    with pytest.warns(ResolutionWarning):
        kernel_profile(g, 0.5)


def test_profile_normalized_and_peaked_at_origin():
    g = make_grid(1, 40.0, 1024)
    prof = kernel_profile(g, 1.0)
    assert np.isclose(prof.profile.integral(), 1.0)
    n = g.points_per_axis
    assert np.argmax(prof.profile.values) == n // 2  # x = 0


def test_gauss_closed_form():
    g = make_grid(1, 40.0, 1024)
    prof = kernel_profile(g, 1.0)
    center = prof.profile.values[g.points_per_axis // 2]
    assert abs(center - 1.0 / np.sqrt(4.0 * np.pi)) < 1e-8


def test_chirp_sum_matches_direct_dft():
    rng = np.random.default_rng(3)
    n, m, theta = 257, 41, 0.01234
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    direct = np.array(
        [np.sum(x * np.exp(1j * theta * j * np.arange(n))) for j in range(m)]
    )
    fast = _chirp_sum(x, m, theta)
    assert np.max(np.abs(fast - direct)) < 1e-10 * np.max(np.abs(direct))


def test_kernel_min_sign_pattern_small():
    g = make_grid(1, 40.0, 1024)
    assert kernel_min(g, 1.0) > -1e-10
    assert kernel_min(g, 2.0) < 0.0


def test_scaling_gap_gauss():
    g = make_grid(1, 40.0, 1024)
    assert verify_kernel_scaling(g, 1.0, 2.0) < 1e-8
