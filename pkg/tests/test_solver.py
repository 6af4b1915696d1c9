import numpy as np
import pytest

from fujita.grid import Field, constant_field, from_function, make_grid, semigroup_apply
from fujita.solver import (
    BlowUp, GlobalCandidate, ModelParams, PurePower, RunControl, TwoRegime,
    ZeroForcing, duhamel_step, forcing_increment, nonlinearity, picard_solve, run,
    spectral_tail_fraction,
)


@pytest.fixture
def small_model():
    g = make_grid(1, 20.0, 256)
    u0 = from_function(g, lambda x: 1e-2 * np.exp(-(x**2)))
    w = from_function(g, lambda x: 1e-2 * np.exp(-0.5 * x**2))
    return ModelParams(g, 0.5, 3.0, 0.0, PurePower(-0.5), w, u0)


def test_forcing_validation():
    with pytest.raises(ValueError):
        PurePower(-1.0)
    with pytest.raises(ValueError):
        TwoRegime(-0.5, 0.5, 0.0)


def test_two_regime_continuity():
    f = TwoRegime(-0.5, 0.5, 2.0)
    eps = 1e-9
    assert np.isclose(f.zeta(2.0 - eps), f.zeta(2.0 + eps), rtol=1e-6)
    # asymptotics: t^sigma at small t, proportional to t^m at large t
    assert np.isclose(f.zeta(1e-4), 1e-4 ** (-0.5))
    assert np.isclose(f.zeta(400.0) / f.zeta(100.0), 2.0)


def test_nonlinearity_signed_flag():
    g = make_grid(1, 20.0, 64)
    u = constant_field(g, -2.0)
    p_abs = ModelParams(g, 0.5, 2.0, 0.0, ZeroForcing(), u, u)
    p_sgn = ModelParams(g, 0.5, 2.0, 0.0, ZeroForcing(), u, u, signed=True)
    assert np.allclose(nonlinearity(u, p_abs).values, 4.0)
    assert np.allclose(nonlinearity(u, p_sgn).values, -4.0)


def test_duhamel_step_linear_exact(small_model):
    # with the nonlinearity switched off the step is the exact semigroup
    g = small_model.grid
    params = ModelParams(g, 0.5, 3.0, 0.0, ZeroForcing(), small_model.w, small_model.u0)
    zero = constant_field(g, 0.0)
    u1 = duhamel_step(small_model.u0, 0.0, 0.25, params, nonlinearity_fn=lambda u: zero)
    exact = semigroup_apply(small_model.u0, 0.5, 0.25)
    assert (u1 - exact).sup() < 1e-14


def test_forcing_increment_zero_mode(small_model):
    # the k=0 mode of the increment is the plain integral of zeta
    inc = forcing_increment(0.1, 0.2, small_model)
    expect = small_model.w.integral() * (2.0 * (0.3**0.5 - 0.1**0.5))
    assert np.isclose(inc.integral(), expect, rtol=1e-10)


def test_spectral_tail_small_for_smooth_field(small_model):
    assert spectral_tail_fraction(small_model.u0) < 1e-10


def test_run_zero_everything_is_global():
    g = make_grid(1, 20.0, 64)
    zero = constant_field(g, 0.0)
    params = ModelParams(g, 0.5, 2.0, 0.0, ZeroForcing(), zero, zero)
    rep = run(params, 1.0, RunControl(dt_init=0.1))
    assert isinstance(rep.classification, GlobalCandidate)
    assert rep.norm_traces["sup"][-1] == 0.0


def test_run_small_data_decays(small_model):
    rep = run(small_model, 1.0, RunControl(dt_init=1e-2))
    assert isinstance(rep.classification, GlobalCandidate)
    assert rep.diagnostics["max_spectral_tail"] < 1e-6
    assert rep.times[-1] == 1.0


def test_run_observer_sees_every_accepted_step(small_model):
    seen = []
    rep = run(small_model, 0.5, RunControl(dt_init=1e-2),
              observer=lambda t, u: seen.append(t))
    assert seen == rep.times


def test_run_blowup_large_data():
    g = make_grid(1, 20.0, 1024)
    u0 = from_function(g, lambda x: 2.0 * np.exp(-(x**2)))
    params = ModelParams(g, 1.0, 3.0, 0.0, ZeroForcing(), constant_field(g, 0.0), u0)
    # threshold sits below the resolution limit of the focusing peak
    rep = run(params, 5.0, RunControl(dt_init=1e-3, blow_threshold=20.0))
    assert isinstance(rep.classification, BlowUp)
    assert 0.0 < rep.classification.t_est < 5.0


def test_picard_matches_stepper(small_model):
    traj, res = picard_solve(small_model, 0.25, mesh_points=64)
    assert res[-1] < 1e-10
    u = small_model.u0
    for i in range(64):
        u = duhamel_step(u, i * 0.25 / 64, 0.25 / 64, small_model)
    assert (u - traj[-1]).sup() / traj[-1].sup() < 1e-10
