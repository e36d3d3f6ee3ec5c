import math

import numpy as np
import pytest

from gkdv.data import critical_band, gaussian, random_band_limited
from gkdv.scattering import (
    active_band,
    dispersive_decay_fit,
    lp_norms,
    scattering_profile,
    small_data_ratio,
    stability_experiment,
)
from gkdv.solver import SolverConfig, Trajectory, evolve
from gkdv.spectral import Field, Grid, airy_propagate, l2_norm


def _free(f, times):
    return Trajectory(f.grid, times, np.array([airy_propagate(f, t).samples for t in times]))


def test_lp_norms_closed_form():
    g = Grid(2 * np.pi, 512)
    u = np.sin(g.x)[None, :]
    assert np.isclose(lp_norms(u, g.spacing, 2.0)[0], np.sqrt(np.pi), rtol=1e-13)
    assert np.isclose(lp_norms(u, g.spacing, 4.0)[0], (3 * np.pi / 4) ** 0.25, rtol=1e-13)
    assert lp_norms(u, g.spacing, math.inf)[0] == pytest.approx(1.0, abs=1e-4)


def test_active_band_single_mode():
    g = Grid(2 * np.pi * 4, 256)
    lo, hi = active_band(Field(g, np.cos(2.5 * g.x)))
    assert lo == pytest.approx(2.5) and hi == pytest.approx(2.5)
    with pytest.raises(ValueError):
        active_band(g.zeros())


def test_free_l2_is_conserved():
    g = Grid(256.0, 1024)
    f = critical_band(g, p=2.0, xi_max=2.0)
    rep = dispersive_decay_fit(f, np.logspace(-1, 1.5, 30), p=2.0, t_min=0.1)
    assert np.max(np.abs(rep.norms / l2_norm(f) - 1)) < 1e-12
    assert abs(rep.exponent) < 1e-12
    assert rep.predicted == 0.0


@pytest.mark.parametrize("p, target", [(math.inf, -1 / 3), (6.0, -2 / 9)])
def test_predicted_exponent(p, target):
    g = Grid(64.0, 256)
    rep = dispersive_decay_fit(critical_band(g, p=p), np.logspace(-1, 1, 20), p=p, t_min=0.1)
    assert rep.predicted == pytest.approx(target, abs=1e-15)
    assert rep.window[1] <= rep.wrap_time


def test_decay_flags_short_window():
    g = Grid(64.0, 256)
    f = critical_band(g, xi_max=4.0)
    rep = dispersive_decay_fit(f, np.logspace(-1, 1, 40), t_min=0.2)
    assert rep.decades < 1 and rep.low_confidence


def test_decay_rejects_bad_input():
    g = Grid(64.0, 256)
    with pytest.raises(ValueError):
        dispersive_decay_fit(gaussian(g), np.logspace(-1, 1, 10))
    with pytest.raises(ValueError):
        dispersive_decay_fit(critical_band(g), [0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        dispersive_decay_fit(critical_band(g), [100.0, 200.0, 300.0])


def test_free_profile_is_constant():
    g = Grid(64.0, 256)
    f = random_band_limited(g, seed=1, xi_cut=2.0)
    prof = scattering_profile(_free(f, np.linspace(0, 2, 9)))
    assert np.max(np.abs(prof.profiles - f.samples)) < 1e-12
    assert prof.total_variation < 1e-11
    assert len(prof.pairs(g)) == 9


def test_profile_preserves_l2():
    g = Grid(64.0, 256)
    traj = evolve(gaussian(g, amplitude=0.8, width=2.0), SolverConfig(dt=1e-3, t_final=0.5, record_stride=50))
    prof = scattering_profile(traj)
    norms = lp_norms(prof.profiles, g.spacing, 2.0)
    assert np.allclose(norms, lp_norms(traj.snapshots, g.spacing, 2.0), rtol=1e-12)
    assert prof.total_variation > 0
    zero = scattering_profile(Trajectory(g, [0.0, 1.0], np.zeros((2, 256))))
    assert not zero.profiles.any() and zero.total_variation == 0.0
    with pytest.raises(ValueError):
        scattering_profile(Trajectory(g, [0.0], np.zeros((1, 256))))


def test_small_data_ratio_scale_free_for_free_flow():
    g = Grid(64.0, 256)
    f = random_band_limited(g, seed=2, xi_cut=2.0, l2=1.0)
    times = np.linspace(0, 1, 11)
    r1 = small_data_ratio(_free(f, times))
    r2 = small_data_ratio(_free(0.01 * f, times))
    assert np.isclose(r1, r2, rtol=1e-10)
    with pytest.raises(ValueError):
        small_data_ratio(Trajectory(g, times, np.zeros((11, 256))))


def test_stability_zero_perturbation():
    g = Grid(64.0, 256)
    cfg = SolverConfig(dt=1e-3, t_final=0.1, record_stride=10)
    rep = stability_experiment(gaussian(g, amplitude=0.8), g.zeros(), cfg)
    assert rep.epsilon == 0.0
    assert rep.strichartz_divergence == 0.0 and rep.energy_divergence == 0.0
    assert rep.strichartz_ratio == 0.0


def test_stability_is_linear_in_epsilon():
    g = Grid(64.0, 256)
    cfg = SolverConfig(dt=1e-3, t_final=0.2, record_stride=10)
    u0 = gaussian(g, amplitude=0.8, width=2.0)
    v = random_band_limited(g, seed=5, xi_cut=2.0, l2=1.0)
    a = stability_experiment(u0, v * 1e-4, cfg)
    b = stability_experiment(u0, v * 5e-5, cfg)
    assert np.isclose(a.energy_ratio, b.energy_ratio, rtol=1e-3)
    assert np.isclose(a.strichartz_ratio, b.strichartz_ratio, rtol=1e-3)
    assert a.energy_ratio >= 1 - 1e-6  # the initial slice alone gives ratio 1
