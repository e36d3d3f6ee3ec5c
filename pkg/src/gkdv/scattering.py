"""Linear dispersive decay, scattering profiles and twin-run experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .norms import mixed_norm_t_x, mixed_norm_x_t, scattering_size
from .solver import SolverConfig, Trajectory, evolve
from .spectral import Field, _rfft, airy_propagate_array, integrate, l2_norm

__all__ = [
    "DecayFitReport",
    "ScatteringProfile",
    "StabilityReport",
    "dispersive_decay_fit",
    "active_band",
    "lp_norms",
    "scattering_profile",
    "stability_experiment",
    "small_data_ratio",
]


def lp_norms(u: np.ndarray, dx: float, p: float) -> np.ndarray:
    """Row-wise ``L^p`` norms of a 2-D array of samples."""
    a = np.abs(u)
    if math.isinf(p):
        return np.max(a, axis=-1)
    return (np.sum(a**p, axis=-1) * dx) ** (1.0 / p)


def active_band(f: Field, tol: float = 1e-8):
    """Smallest ``[xi_lo, xi_hi]`` holding all but a fraction ``tol`` of the spectral power.

    The excluded power is split evenly between the two ends.
    """
    c = _rfft(f.samples)
    pw = np.abs(c) ** 2
    pw[1:] *= 2.0
    total = pw.sum()
    if total == 0:
        raise ValueError("zero datum has no spectral band")
    xi = f.grid.rwavenumbers
    below = np.cumsum(pw) / total
    above = np.cumsum(pw[::-1])[::-1] / total
    lo = xi[np.argmax(below > tol / 2)]
    hi_idx = np.nonzero(above > tol / 2)[0][-1]
    return float(lo), float(xi[hi_idx])


@dataclass(frozen=True)
class DecayFitReport:
    """Log-log fit of ``||e^{-t d^3} u0||_{L^p}`` against ``t``."""

    p: float
    times: np.ndarray
    norms: np.ndarray
    exponent: float
    residual: float
    window: tuple
    wrap_time: float
    decades: float
    low_confidence: bool
    box_length: float
    band: tuple

    @property
    def predicted(self) -> float:
        """Sharp exponent ``-(2/3)(1/2 - 1/p)``."""
        return -(2.0 / 3.0) * (0.5 - (0.0 if math.isinf(self.p) else 1.0 / self.p))


def dispersive_decay_fit(u0: Field, t_grid, p: float = math.inf, t_min: float = None,
                         band_tol: float = 1e-8) -> DecayFitReport:
    """Measure the decay exponent of the free Airy evolution in ``L^p``.

    The fit window runs from ``t_min`` (default ``8 / xi_hi^3``, after the
    initial transient) to the wraparound time ``L / (3 xi_hi^2)``, where
    ``xi_hi`` is the top of the datum's active band and ``3 xi^2`` its group
    speed.  Windows under one decade are flagged ``low_confidence``.

    Raises
    ------
    ValueError
        If the datum has a nonzero mean, or fewer than 3 samples fall in the window.
    """
    g = u0.grid
    t_grid = np.sort(np.asarray(t_grid, dtype=float))
    if np.any(t_grid <= 0):
        raise ValueError("decay times must be positive")
    mean = abs(integrate(u0.samples, g))
    if mean > 1e-10 * max(np.sum(np.abs(u0.samples)) * g.spacing, 1e-300):
        raise ValueError("datum must have zero mean")
    band = active_band(u0, band_tol)
    xi_hi = band[1]
    wrap = g.box_length / (3.0 * xi_hi**2)
    if t_min is None:
        t_min = 8.0 / xi_hi**3
    U = airy_propagate_array(np.broadcast_to(u0.samples, (t_grid.size, g.n_points)), g, t_grid)
    norms = lp_norms(U, g.spacing, p)
    sel = (t_grid >= t_min) & (t_grid <= wrap)
    if sel.sum() < 3:
        raise ValueError(f"fewer than 3 times inside the window [{t_min:.3g}, {wrap:.3g}]")
    ts, ns = t_grid[sel], norms[sel]
    coef = np.polyfit(np.log(ts), np.log(ns), 1)
    resid = float(np.sqrt(np.mean((np.polyval(coef, np.log(ts)) - np.log(ns)) ** 2)))
    decades = float(np.log10(ts[-1] / ts[0]))
    return DecayFitReport(
        p=float(p), times=t_grid, norms=norms, exponent=float(coef[0]), residual=resid,
        window=(float(ts[0]), float(ts[-1])), wrap_time=float(wrap), decades=decades,
        low_confidence=decades < 1.0, box_length=g.box_length, band=band,
    )


@dataclass(frozen=True)
class ScatteringProfile:
    """Pulled-back profiles ``w(t) = e^{t d^3} u(t)`` and their successive L^2 increments."""

    times: np.ndarray
    profiles: np.ndarray
    increments: np.ndarray
    box_length: float

    @property
    def total_variation(self) -> float:
        return float(np.sum(self.increments))

    def pairs(self, grid):
        return [(float(t), Field(grid, w)) for t, w in zip(self.times, self.profiles)]


def scattering_profile(traj: Trajectory) -> ScatteringProfile:
    if len(traj) < 2:
        raise ValueError("scattering_profile needs at least 2 snapshots")
    g = traj.grid
    w = airy_propagate_array(traj.snapshots, g, -traj.times)
    inc = lp_norms(np.diff(w, axis=0), g.spacing, 2.0)
    return ScatteringProfile(traj.times, w, inc, g.box_length)


def small_data_ratio(traj: Trajectory) -> float:
    """``S / M^(5/2)``: scattering size over the run divided by the mass to the 5/2."""
    m = l2_norm(traj.field(0)) ** 2
    if m == 0:
        raise ValueError("zero datum")
    return scattering_size(traj) / m**2.5


@dataclass(frozen=True)
class StabilityReport:
    epsilon: float
    strichartz_divergence: float  # L^5_x L^10_t
    energy_divergence: float  # L^inf_t L^2_x

    @property
    def strichartz_ratio(self) -> float:
        return self.strichartz_divergence / self.epsilon if self.epsilon else 0.0

    @property
    def energy_ratio(self) -> float:
        return self.energy_divergence / self.epsilon if self.epsilon else 0.0


def stability_experiment(u0: Field, perturbation: Field, cfg: SolverConfig) -> StabilityReport:
    """Twin runs from ``u0`` and ``u0 + perturbation``; divergence measured on the shared record."""
    a = evolve(u0, cfg)
    b = evolve(u0 + perturbation, cfg)
    diff = Trajectory(a.grid, a.times, b.snapshots - a.snapshots, dict(a.provenance))
    return StabilityReport(
        epsilon=l2_norm(perturbation),
        strichartz_divergence=mixed_norm_x_t(diff, 5, 10),
        energy_divergence=mixed_norm_t_x(diff, math.inf, 2),
    )
