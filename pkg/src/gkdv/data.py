"""Initial-datum families used by tests, demos and the harness."""

from __future__ import annotations

import numpy as np

from ._util import smooth_step
from .spectral import Field, Grid, _irfft, l2_norm

__all__ = ["gaussian", "sech", "critical_band", "random_band_limited", "power_tail", "make_datum", "FAMILIES"]


def _normalise(grid: Grid, u: np.ndarray, l2):
    f = Field(grid, u)
    if l2 is None:
        return f
    n = l2_norm(f)
    if n == 0:
        raise ValueError("cannot normalise a zero datum")
    return f * (l2 / n)


def gaussian(grid: Grid, amplitude=1.0, width=1.0, center=0.0, l2=None) -> Field:
    """``amplitude * exp(-((x - center)/width)^2)``, optionally rescaled to L^2 norm ``l2``."""
    x = grid.x
    return _normalise(grid, amplitude * np.exp(-(((x - center) / width) ** 2)), l2)


def sech(grid: Grid, amplitude=1.0, width=1.0, center=0.0, l2=None) -> Field:
    x = grid.x
    return _normalise(grid, amplitude / np.cosh((x - center) / width), l2)


def critical_band(grid: Grid, xi_min=0.01, xi_max=4.0, p=np.inf, taper=0.5, l2=1.0) -> Field:
    """Real, even, mean-zero datum with spectrum ``|xi|^(-1/p)`` on ``[xi_min, xi_max]``.

    The profile ``|xi|^(-1/p)`` is the scale-critical one for ``L^{p'}``, so the
    free evolution decays in ``L^p`` at the sharp dispersive rate
    ``t^(-(2/3)(1/2 - 1/p))`` for ``xi_max^-3 << t << xi_min^-3``.  Band edges
    are tapered smoothly over a relative width ``taper``; the spectrum vanishes
    exactly outside ``[xi_min, xi_max]``.
    """
    if not 0 < xi_min < xi_max <= grid.xi_max:
        raise ValueError("need 0 < xi_min < xi_max <= Nyquist")
    xi = grid.rwavenumbers
    w = np.zeros_like(xi)
    pos = xi > 0
    w[pos] = xi[pos] ** (0.0 if np.isinf(p) else -1.0 / p)
    w *= smooth_step((xi / xi_min - 1.0) / taper)
    w *= 1.0 - smooth_step((xi / xi_max - (1.0 - taper)) / taper)
    u = np.fft.fftshift(_irfft(w.astype(complex), grid.n_points))
    return _normalise(grid, u, l2)


def random_band_limited(grid: Grid, seed=0, xi_cut=4.0, envelope=8.0, l2=1.0) -> Field:
    """Random Fourier modes with ``|xi| <= xi_cut`` under a Gaussian envelope of width ``envelope``.

    The envelope keeps the field Schwartz-like on the box; the spectrum is then
    band-limited up to Gaussian tails.
    """
    rng = np.random.default_rng(seed)
    xi = grid.rwavenumbers
    active = (xi > 0) & (xi <= xi_cut)
    c = np.zeros(xi.size, dtype=complex)
    c[active] = rng.standard_normal(active.sum()) + 1j * rng.standard_normal(active.sum())
    u = _irfft(c, grid.n_points) * np.exp(-0.5 * (grid.x / envelope) ** 2)
    return _normalise(grid, u, l2)


def power_tail(grid: Grid, amplitude=0.5, onset=-6.0, cutoff=150.0, cutoff_width=30.0, l2=None) -> Field:
    """One-sided algebraic tail ``amplitude (1 + x^2)^(-1/4)`` for ``onset < x < cutoff``.

    ``u^2`` falls off like ``1/x``, which makes the Morawetz truncation error
    visible at every radius below ``cutoff``.  Both ends are switched on and off
    with smooth steps (width 4 at the onset).
    """
    x = grid.x
    u = amplitude * (1 + x**2) ** -0.25
    u = u * smooth_step((x - onset) / 4.0) * (1.0 - smooth_step((x - cutoff) / cutoff_width))
    return _normalise(grid, u, l2)


FAMILIES = {
    "gaussian": gaussian,
    "sech": sech,
    "shell": critical_band,
    "random": random_band_limited,
    "power_tail": power_tail,
}


def make_datum(grid: Grid, family: str, **params) -> Field:
    try:
        fn = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown datum family {family!r}; choose from {sorted(FAMILIES)}") from None
    return fn(grid, **params)
