import numpy as np
import pytest

from gkdv.data import gaussian
from gkdv.solver import (
    BlowupError,
    SolverConfig,
    SpectralFilter,
    Trajectory,
    duhamel_residual,
    edge_mass_fraction,
    evolve,
    nonlinearity,
    rescale,
    step,
)
from gkdv.spectral import Field, Grid, airy_propagate, derivative, l2_norm


@pytest.fixture
def grid():
    return Grid(64.0, 256)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"dt": 0.0},
        {"t_final": -1.0},
        {"dealias_ratio": 2.0},
        {"record_stride": 0},
        {"sign": "focusing"},
        {"dt": 0.003, "t_final": 0.01},
        {"blowup_factor": 1.0},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_dt_validator(grid):
    u0 = gaussian(grid, amplitude=3.0)
    cfg = SolverConfig(dt=0.01, t_final=0.02)
    with pytest.raises(ValueError, match="step bound"):
        evolve(u0, cfg)
    assert SolverConfig(nonlinear=False).max_dt(u0) == np.inf


def test_linear_run_is_exact_airy(grid):
    u0 = gaussian(grid, width=1.5)
    traj = evolve(u0, SolverConfig(dt=0.01, t_final=0.5, record_stride=10, nonlinear=False))
    for t, f in zip(traj.times, traj.fields()):
        assert np.allclose(f.samples, airy_propagate(u0, t).samples, atol=1e-12)


def test_recording_includes_endpoints(grid):
    traj = evolve(gaussian(grid, amplitude=0.8), SolverConfig(dt=0.01, t_final=0.25, record_stride=10))
    assert np.allclose(traj.times, [0.0, 0.1, 0.2, 0.25])
    assert traj.nonlinear
    assert traj.provenance["grid"] == {"box_length": 64.0, "n_points": 256}


def test_nonlinearity_matches_pointwise_for_band_limited(grid):
    # a low mode raised to the fifth power stays resolved, so dealiasing is exact
    f = Field(grid, 0.5 * np.cos(2 * np.pi * 3 * grid.x / grid.box_length))
    exact = derivative(Field(grid, f.samples**5)).samples
    assert np.allclose(nonlinearity(f).samples, exact, atol=1e-12)


def test_step_agrees_with_evolve(grid):
    u0 = gaussian(grid, amplitude=0.8)
    cfg = SolverConfig(dt=0.01, t_final=0.01)
    assert np.allclose(step(u0, 0.01, cfg).samples, evolve(u0, cfg).snapshots[-1], atol=1e-14)


def test_time_reversal():
    grid = Grid(64.0, 128)
    u0 = gaussian(grid, amplitude=0.8)
    cfg = SolverConfig(dt=0.005, t_final=0.005)
    u = u0
    for _ in range(20):
        u = step(u, 0.005, cfg)
    for _ in range(20):
        u = step(u, -0.005, cfg)
    # RK4 is not symmetric, so the round trip carries an O(T dt^4) error
    assert np.max(np.abs(u.samples - u0.samples)) < 5e-8


def test_fourth_order_in_dt():
    # coarse grid keeps xi_max^3 dt moderate, so the asymptotic order is visible
    grid = Grid(64.0, 128)
    u0 = gaussian(grid, amplitude=0.6)
    ref = evolve(u0, SolverConfig(dt=0.0003125, t_final=0.2, record_stride=10**6)).field(-1)
    errs = []
    for dt in (0.005, 0.0025):
        u = evolve(u0, SolverConfig(dt=dt, t_final=0.2, record_stride=10**6)).field(-1)
        errs.append(l2_norm(u - ref))
    assert 3.5 < np.log2(errs[0] / errs[1]) < 4.5


def test_blowup_guard_reports_time(grid):
    # a pre-dispersed bump refocuses under the flow, so its sup norm grows
    u0 = airy_propagate(gaussian(grid, amplitude=0.05, width=0.5), -1.0)
    cfg = SolverConfig(dt=0.01, t_final=1.0, blowup_factor=1.5, record_stride=1)
    with pytest.raises(BlowupError) as info:
        evolve(u0, cfg)
    assert 0 < info.value.time <= 1.0


def test_filter_damps_top_modes(grid):
    sym = SpectralFilter().symbol(grid)
    assert sym[0] == 1.0 and sym[-1] < 1e-10
    u0 = gaussian(grid, width=0.3, amplitude=0.2)
    cfg = SolverConfig(dt=0.01, t_final=0.1, spectral_filter=SpectralFilter())
    assert evolve(u0, cfg).snapshots.shape == (11, 256)


def test_edge_mass(grid):
    assert edge_mass_fraction(gaussian(grid)) < 1e-12
    assert edge_mass_fraction(grid.zeros()) == 0.0
    assert edge_mass_fraction(gaussian(grid, center=30.0)) > 0.5


@pytest.mark.parametrize("lam", [2.0, 0.5, 1.5])
def test_rescale_round_trip(grid, lam):
    f = gaussian(grid, width=2.0)
    back = rescale(rescale(f, lam), 1.0 / lam)
    assert np.allclose(back.samples, f.samples, atol=1e-12)


def test_rescale_matches_formula(grid):
    f = gaussian(grid, width=2.0)
    assert np.allclose(rescale(f, 2.0).samples, np.sqrt(2.0) * np.exp(-((2.0 * grid.x / 2.0) ** 2)), atol=1e-13)


def test_rescale_preserves_mass(grid):
    f = gaussian(grid, width=2.0)
    assert np.isclose(l2_norm(rescale(f, 2.0)), l2_norm(f), rtol=1e-12)


def test_rescale_guards(grid):
    with pytest.raises(ValueError, match="aliases"):
        rescale(gaussian(grid, width=0.2), 4.0)
    with pytest.raises(ValueError, match="wraps"):
        rescale(gaussian(grid, width=8.0), 0.25)
    with pytest.raises(ValueError):
        rescale(gaussian(grid), -1.0)


def test_duhamel_residual_converges(grid):
    traj = evolve(gaussian(grid, amplitude=0.8), SolverConfig(dt=0.0025, t_final=0.2, record_stride=4))
    coarse = duhamel_residual(traj.subsample(2))[-1]
    fine = duhamel_residual(traj)[-1]
    assert fine < 2e-3
    assert 3.0 < coarse / fine < 5.0


def test_duhamel_residual_linear_is_zero(grid):
    traj = evolve(gaussian(grid), SolverConfig(dt=0.01, t_final=0.1, nonlinear=False))
    assert np.max(duhamel_residual(traj)) < 1e-13


def test_trajectory_validation(grid):
    with pytest.raises(ValueError):
        Trajectory(grid, np.array([0.0, 0.0]), np.zeros((2, 256)))
    with pytest.raises(ValueError):
        Trajectory(grid, np.array([0.0]), np.zeros((2, 256)))
    t = Trajectory(grid, np.array([0.0, 0.1, 0.3]), np.zeros((3, 256)))
    with pytest.raises(ValueError, match="uniformly"):
        t.uniform_stride()
    assert len(t.restrict(0.05, 0.3)) == 2
