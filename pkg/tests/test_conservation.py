import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from gkdv.conservation import (
    ENERGY_CURRENT_U4UX2,
    density_bundle,
    energy,
    local_law_residual,
    mass,
    monotonicity_functional,
    tao_positivity,
)
from gkdv.data import gaussian, random_band_limited
from gkdv.solver import SolverConfig, Trajectory, evolve
from gkdv._util import stride_convergence
from gkdv.spectral import Grid


def _law_residual(density, current):
    """Symbolic ``d_t density + d_x^3 density - d_x current`` along solutions."""
    x, t = sp.symbols("x t")
    u = sp.Function("u")(x, t)
    ut = -sp.diff(u, x, 3) + sp.diff(u**5, x)
    ux, uxx = sp.diff(u, x), sp.diff(u, x, 2)
    dens = density(u, ux, uxx)
    cur = current(u, ux, uxx)
    r = (sp.diff(dens, t) + sp.diff(dens, x, 3) - sp.diff(cur, x)).doit()
    for m in (2, 1):
        r = r.subs(sp.Derivative(u, (x, m), t), sp.diff(ut, x, m))
    r = r.subs(sp.Derivative(u, t), ut)
    return sp.expand(r), u, x


def test_mass_law_symbolic():
    r, _, _ = _law_residual(lambda u, ux, uxx: u**2, lambda u, ux, uxx: 3 * ux**2 + sp.Rational(5, 3) * u**6)
    assert r == 0


def test_energy_law_symbolic():
    c = sp.Integer(int(ENERGY_CURRENT_U4UX2))
    r, _, _ = _law_residual(
        lambda u, ux, uxx: ux**2 / 2 + u**6 / 6,
        lambda u, ux, uxx: sp.Rational(3, 2) * uxx**2 + c * u**4 * ux**2 + u**10 / 2,
    )
    assert r == 0


def test_energy_law_defect_for_other_coefficient():
    r, u, x = _law_residual(
        lambda u, ux, uxx: ux**2 / 2 + u**6 / 6,
        lambda u, ux, uxx: sp.Rational(3, 2) * uxx**2 + 2 * u**4 * ux**2 + u**10 / 2,
    )
    assert sp.simplify(r - sp.diff(8 * u**4 * sp.diff(u, x) ** 2, x)) == 0


def test_gap_identity_symbolic():
    m, ix, ixx, ix4, i6, i10 = sp.symbols("m I_x I_xx I_x4 I_6 I_10")
    rho, j = m, 3 * ix + sp.Rational(5, 3) * i6
    e, k = ix / 2 + i6 / 6, sp.Rational(3, 2) * ixx + 10 * ix4 + i10 / 2
    l33 = rho * k - e * j
    q = (sp.Rational(3, 2) * m * ixx - sp.Rational(3, 2) * ix**2 + 10 * m * ix4 + m * i10 / 2
         - sp.Rational(4, 3) * i6 * ix - i6**2 / 2)
    assert sp.expand(l33 - q - sp.Rational(2, 9) * i6**2) == 0


def test_mass_and_energy_of_gaussian():
    g = Grid(64.0, 512)
    f = gaussian(g)
    assert np.isclose(mass(f), np.sqrt(np.pi / 2), rtol=1e-13)
    # int (u_x^2 / 2) = sqrt(pi/2)/2 for exp(-x^2); int u^6 / 6 = sqrt(pi/6)/6
    assert np.isclose(energy(f), np.sqrt(np.pi / 2) / 2 + np.sqrt(np.pi / 6) / 6, rtol=1e-12)


def test_density_bundle_linear_drops_nonlinear_terms():
    g = Grid(32.0, 128)
    f = gaussian(g)
    lin = density_bundle(f, nonlinear=False)
    full = density_bundle(f)
    assert np.allclose(lin.rho.samples, full.rho.samples)
    assert np.allclose(full.e.samples - lin.e.samples, f.samples**6 / 6)


@pytest.mark.parametrize("nonlinear", [True, False])
@pytest.mark.parametrize("which", ["mass", "energy"])
def test_local_laws_second_order(nonlinear, which):
    g = Grid(128.0, 1024)
    traj = evolve(gaussian(g, width=np.sqrt(2.0)), SolverConfig(dt=5e-4, t_final=0.2, record_stride=2,
                                                                nonlinear=nonlinear))
    _, _, order = stride_convergence(traj, lambda t: local_law_residual(t, which))
    assert abs(order - 2) < 0.3


def test_local_law_rejects_bad_input():
    g = Grid(16.0, 64)
    t = Trajectory(g, [0.0, 1.0], np.zeros((2, 64)))
    with pytest.raises(ValueError):
        local_law_residual(t)
    t3 = Trajectory(g, [0.0, 1.0, 2.0], np.zeros((3, 64)))
    with pytest.raises(ValueError):
        local_law_residual(t3, "momentum")
    assert np.all(local_law_residual(t3) == 0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), l2=st.floats(0.05, 3.0))
def test_positivity_on_random_fields(seed, l2):
    g = Grid(64.0, 256)
    f = random_band_limited(g, seed=seed, l2=l2)
    m = monotonicity_functional(f)
    q = tao_positivity(f)
    i6 = np.sum(f.samples**6) * g.spacing
    assert m > 0 and q > 0 and tao_positivity(f, c=2.0) > 0
    assert abs((m - q) - (2.0 / 9.0) * i6**2) <= 1e-9 * m
