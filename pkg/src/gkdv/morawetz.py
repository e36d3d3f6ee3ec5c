"""Truncated and interaction Morawetz functionals and compactness trackers."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq
from scipy.special import roots_legendre

from ._util import loglog_slope, smooth_step, stride_convergence
from .conservation import _densities
from .solver import Trajectory
from .spectral import Field, derivative_array, integrate

__all__ = [
    "CutoffProfile",
    "MorawetzKernel",
    "CompactnessTrack",
    "KernelResolutionWarning",
    "build_cutoff",
    "truncated_morawetz",
    "truncated_morawetz_flux_check",
    "build_interaction_kernel",
    "interaction_morawetz",
    "interaction_flux",
    "interaction_flux_check",
    "export_kernel_table",
    "track_compactness",
]


class KernelResolutionWarning(UserWarning):
    pass


def _gauss_cumulative(fn, nodes, order=20):
    """``int_{nodes[0]}^{nodes[i]} fn`` at every node, by Gauss-Legendre on each cell."""
    gx, gw = roots_legendre(order)
    a, b = nodes[:-1], nodes[1:]
    half = 0.5 * (b - a)
    pts = 0.5 * (a + b)[:, None] + half[:, None] * gx
    cells = (fn(pts) @ gw) * half
    return np.concatenate([[0.0], np.cumsum(cells)])


# ---------------------------------------------------------------------------
# truncated Morawetz potential


@dataclass(frozen=True, eq=False)
class CutoffProfile:
    """Odd weight ``psi`` with ``psi(x) = x`` on ``[0, 1]`` and ``psi = 3/2`` beyond ``1 + width``.

    ``phi = psi'`` equals 1 on ``[0, 1]`` and falls smoothly to 0 on the ramp
    ``[1, 1 + width]`` as ``1 - S(s^beta)``, ``s = (x - 1)/width``, with ``beta``
    chosen so the ramp carries exactly the missing 1/2.
    """

    transition_width: float
    beta: float
    ramp_x: np.ndarray
    psi_table: np.ndarray
    phi_table: np.ndarray

    @cached_property
    def _spline(self):
        return CubicHermiteSpline(self.ramp_x, self.psi_table, self.phi_table)

    @property
    def plateau(self) -> float:
        return 1.5

    def _ramp_phi(self, ax):
        s = (ax - 1.0) / self.transition_width
        return 1.0 - smooth_step(np.clip(s, 0, 1) ** self.beta)

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        end = 1.0 + self.transition_width
        ramp = self._spline(np.clip(ax, 1.0, end))
        out = np.where(ax <= 1.0, ax, np.where(ax >= end, self.plateau, ramp))
        return np.sign(x) * out

    def phi(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        end = 1.0 + self.transition_width
        return np.where(ax <= 1.0, 1.0, np.where(ax >= end, 0.0, self._ramp_phi(ax)))


def build_cutoff(transition_width: float = 1.0, table_points: int = 4001) -> CutoffProfile:
    """Tabulate the truncated-Morawetz weight.

    The ramp must carry area 1/2 over a width ``transition_width``, which needs
    ``transition_width > 1/2``.
    """
    w = float(transition_width)
    if not w > 0.5:
        raise ValueError(f"transition_width must exceed 1/2, got {w}")
    def ramp_area(beta):
        # the step is steep near s = 0 for small beta, so fixed Gauss rules lose digits
        return quad(lambda s: 1.0 - smooth_step(s**beta), 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)[0]

    if w == 1.0:
        beta = 1.0  # symmetric step already has area 1/2
    else:
        target = 0.5 / w
        lb = brentq(lambda b: ramp_area(np.exp(b)) - target, -12.0, 12.0, xtol=1e-15)
        beta = float(np.exp(lb))
    ramp_x = np.linspace(1.0, 1.0 + w, table_points)
    phi_fn = lambda x: 1.0 - smooth_step(np.clip((x - 1.0) / w, 0, 1) ** beta)
    psi = 1.0 + _gauss_cumulative(phi_fn, ramp_x)
    return CutoffProfile(w, beta, ramp_x, psi, phi_fn(ramp_x))


def truncated_morawetz(f: Field, R: float, prof: CutoffProfile) -> float:
    """``R int psi(x/R) u^2 dx``."""
    if not R > 0:
        raise ValueError("R must be positive")
    return R * integrate(prof.psi(f.grid.x / R) * f.samples**2, f.grid)


@dataclass(frozen=True)
class TruncatedFluxReport:
    R_values: np.ndarray
    times: np.ndarray
    defects: np.ndarray  # shape (len(R_values), len(times))
    slope: float

    @property
    def max_defects(self) -> np.ndarray:
        return np.max(self.defects, axis=1)


def truncated_morawetz_flux_check(traj: Trajectory, R_values=(8, 16, 32, 64), prof: CutoffProfile = None):
    """Defect of ``dM/dt = -int phi(x/R) j dx`` at each interior snapshot and radius.

    The exact remainder is ``R^-2 int psi'''(x/R) u^2``; the report's ``slope`` is the
    log-log fit of the max defect against ``R``.
    """
    if prof is None:
        prof = build_cutoff()
    h = traj.uniform_stride()
    if len(traj) < 3:
        raise ValueError("need at least 3 snapshots")
    g = traj.grid
    x = g.x
    u = traj.snapshots
    _, j, _, _ = _densities(u, g, traj.nonlinear)
    R_values = np.asarray(R_values, dtype=float)
    defects = []
    for R in R_values:
        M = R * integrate(prof.psi(x / R) * u**2, g)
        dM = (M[2:] - M[:-2]) / (2 * h)
        flux = integrate(prof.phi(x / R) * j[1:-1], g)
        defects.append(np.abs(dM + flux))
    defects = np.array(defects)
    peak = np.max(defects, axis=1)
    slope = loglog_slope(R_values, peak) if np.all(peak > 0) and R_values.size > 1 else float("nan")
    return TruncatedFluxReport(R_values, traj.times[1:-1], defects, slope)


# ---------------------------------------------------------------------------
# interaction Morawetz


def _chi(x, a, w):
    """Even mollified indicator: 1 on ``|x| <= a``, 0 on ``|x| >= a + w``."""
    return 1.0 - smooth_step((np.abs(x) - a) / w)


def _phi_values(s, R, w, n_gl=32, n_a=16, chunk=256):
    """``R^-2 int_R^{2R} int chi_a(t) chi_a(s - t) dt da`` by nested Gauss-Legendre."""
    s = np.asarray(s, dtype=float)
    gx, gw = roots_legendre(n_gl)
    ax_, aw_ = roots_legendre(n_a)
    out = np.empty(s.size)
    for start in range(0, s.size, chunk):
        sc = s[start : start + chunk]
        m = sc.size
        # split the a-range where the autocorrelation changes regime
        abs_s = np.abs(sc)[:, None]
        cuts = np.clip(np.hstack([(abs_s - 2 * w) / 2, (abs_s - w) / 2, abs_s / 2]), R, 2 * R)
        edges = np.sort(np.hstack([np.full((m, 1), R), cuts, np.full((m, 1), 2 * R)]), axis=1)
        lo, hi = edges[:, :-1], edges[:, 1:]
        a = 0.5 * (lo + hi)[..., None] + 0.5 * (hi - lo)[..., None] * ax_
        wa = 0.5 * (hi - lo)[..., None] * aw_
        a = a.reshape(m, -1)
        wa = wa.reshape(m, -1)
        ss = np.broadcast_to(sc[:, None], a.shape)
        pts = np.stack([-a - w, -a, a, a + w, ss - a - w, ss - a, ss + a, ss + a + w], axis=-1)
        left = np.maximum(-a - w, ss - a - w)[..., None]
        right = np.minimum(a + w, ss + a + w)[..., None]
        pts = np.sort(np.clip(pts, left, right), axis=-1)
        p0, p1 = pts[..., :-1], pts[..., 1:]
        t = 0.5 * (p0 + p1)[..., None] + 0.5 * (p1 - p0)[..., None] * gx
        wt = 0.5 * (p1 - p0)[..., None] * gw
        A = a[..., None, None]
        integrand = _chi(t, A, w) * _chi(ss[..., None, None] - t, A, w)
        auto = np.sum(integrand * wt, axis=(-1, -2))
        out[start : start + m] = np.sum(auto * wa, axis=-1) / R**2
    return out


@dataclass(frozen=True, eq=False)
class MorawetzKernel:
    """Tabulated interaction weight ``phi(s)`` and its antiderivative ``psi(s) = int_0^s phi``."""

    R: float
    R1: float
    chi_width: float
    offsets: np.ndarray
    phi_table: np.ndarray
    psi_table: np.ndarray
    quadrature_error: float

    @cached_property
    def _spline(self):
        return CubicHermiteSpline(self.offsets, self.psi_table, self.phi_table)

    @cached_property
    def _dspline(self):
        return self._spline.derivative()

    @property
    def extent(self) -> float:
        return float(self.offsets[-1])

    @property
    def support(self) -> float:
        """``phi`` vanishes for ``|s| >= 2 (2R + chi_width)``."""
        return 2.0 * (2.0 * self.R + self.chi_width)

    def psi(self, s):
        s = np.asarray(s, dtype=float)
        return self._spline(np.clip(s, -self.extent, self.extent))

    def phi(self, s):
        s = np.asarray(s, dtype=float)
        inside = np.abs(s) <= self.extent
        return np.where(inside, self._dspline(np.clip(s, -self.extent, self.extent)), 0.0)


def build_interaction_kernel(R: float, R1: float = None, chi_width: float = None,
                             points_per_width: int = 50, n_gl: int = 32, n_a: int = 16) -> MorawetzKernel:
    """Tabulate ``phi(s) = R^-2 int_R^{2R} int chi_a(s - t) chi_a(t) dt da`` for ``|s| <= 2(2R + R1)``.

    ``chi_a`` is 1 on ``|x| <= a`` and ramps to 0 over ``chi_width`` (default ``R1``,
    which defaults to ``sqrt(R)``).  ``phi`` is evaluated independently at ``s``
    and ``-s``; ``psi`` is accumulated with Gauss-Legendre cells from the origin.
    A coarse self-check at doubled quadrature orders is stored as
    ``quadrature_error``; above 1e-8 a :class:`KernelResolutionWarning` is issued.
    """
    R = float(R)
    R1 = float(np.sqrt(R)) if R1 is None else float(R1)
    if not 0 < R1 < R:
        raise ValueError(f"need 0 < R1 < R, got R={R}, R1={R1}")
    w = R1 if chi_width is None else float(chi_width)
    if not 0 < w <= R1:
        raise ValueError("chi_width must lie in (0, R1]")
    extent = 2.0 * (2.0 * R + R1)
    half = int(np.ceil(extent * points_per_width / w))
    offsets = np.linspace(-extent, extent, 2 * half + 1)
    phi = _phi_values(offsets, R, w, n_gl, n_a)

    # psi from 0 outwards on each side
    fn = lambda s: _phi_values(s.ravel(), R, w, n_gl, n_a).reshape(s.shape)
    pos = offsets[half:]
    psi_pos = _gauss_cumulative(fn, pos, order=4)
    neg = offsets[: half + 1][::-1]
    psi_neg = _gauss_cumulative(fn, neg, order=4)
    psi = np.concatenate([psi_neg[::-1][:-1], psi_pos])

    probe = offsets[:: max(1, offsets.size // 64)]
    err = float(np.max(np.abs(_phi_values(probe, R, w, 2 * n_gl, 2 * n_a) - _phi_values(probe, R, w, n_gl, n_a))))
    if err > 1e-8:
        warnings.warn(f"kernel quadrature self-estimate {err:.2e} exceeds 1e-8", KernelResolutionWarning)
    return MorawetzKernel(R, R1, w, offsets, phi, psi, err)


def export_kernel_table(kernel: MorawetzKernel, path, which: str = "phi"):
    """Write ``offset value`` rows for ``phi`` or ``psi`` as plain text."""
    table = {"phi": kernel.phi_table, "psi": kernel.psi_table}[which]
    np.savetxt(path, np.column_stack([kernel.offsets, table]), fmt="%.17g", header=f"offset {which}")


def _offsets(grid):
    n = grid.n_points
    m = np.arange(n)
    return np.where(m < n // 2, m, m - n) * grid.spacing


def _correlate(a, b):
    """``C_m = sum_j a_j b_{j+m}`` (periodic), i.e. pairs with ``x - y = m dx``."""
    return np.fft.irfft(np.conj(np.fft.rfft(a)) * np.fft.rfft(b), a.shape[-1])


def _kernel_args(grid, kernel, R, Ntilde):
    if not Ntilde > 0:
        raise ValueError("Ntilde must be positive")
    arg = _offsets(grid) * Ntilde / R
    if np.max(np.abs(arg)) > kernel.extent and abs(kernel.phi_table[-1]) > 1e-14:
        raise ValueError("kernel table does not cover the box at this R/Ntilde")
    return arg


def interaction_morawetz(f: Field, kernel: MorawetzKernel, R: float, Ntilde: float,
                         method: str = "fft", nonlinear: bool = True) -> float:
    """``R iint psi((x - y) Ntilde / R) rho(y) e(x) dx dy`` on the torus.

    ``x - y`` is the minimal-image offset; the single offset ``L/2`` (where the
    odd weight is two-valued) gets weight 0.  ``method='direct'`` evaluates the
    O(n^2) double sum instead of the FFT correlation.
    """
    g = f.grid
    arg = _kernel_args(g, kernel, R, Ntilde)
    rho, _, e, _ = _densities(f.samples, g, nonlinear)
    if method == "fft":
        weights = kernel.psi(arg)
        weights[g.n_points // 2] = 0.0
        return float(R * g.spacing**2 * np.dot(weights, _correlate(rho, e)))
    if method == "direct":
        n = g.n_points
        i = np.arange(n)
        diff = (i[:, None] - i[None, :]) % n  # index offset of x_i - y_j
        weights = kernel.psi(_offsets(g) * Ntilde / R)
        weights[n // 2] = 0.0
        return float(R * g.spacing**2 * np.sum(weights[diff] * e[:, None] * rho[None, :]))
    raise ValueError(f"unknown method {method!r}")


def interaction_flux(f: Field, kernel: MorawetzKernel, R: float, Ntilde: float, nonlinear: bool = True) -> float:
    """``Ntilde iint phi((x - y) Ntilde / R) [-rho(y) k(x) + j(y) e(x)] dx dy``.

    With ``Ntilde`` constant this is the exact time derivative of
    :func:`interaction_morawetz`: the third-derivative terms from ``rho`` and
    ``e`` cancel after integration by parts.
    """
    g = f.grid
    arg = _kernel_args(g, kernel, R, Ntilde)
    rho, j, e, k = _densities(f.samples, g, nonlinear)
    weights = kernel.phi(arg)
    corr = -_correlate(rho, k) + _correlate(j, e)
    return float(Ntilde * g.spacing**2 * np.dot(weights, corr))


@dataclass(frozen=True)
class InteractionFluxReport:
    times: np.ndarray
    residuals: np.ndarray
    strides: np.ndarray
    stride_errors: np.ndarray
    order: float
    flux_at_start: float


def interaction_flux_check(traj: Trajectory, kernel: MorawetzKernel, R: float, Ntilde: float,
                           factors=(4, 2, 1)) -> InteractionFluxReport:
    """Compare the central-difference derivative of the interaction functional with its flux.

    ``residuals`` are at the recorded stride; ``order`` is the convergence slope
    of the residual under stride refinement by ``factors``.
    """
    nl = traj.nonlinear
    M = np.array([interaction_morawetz(f, kernel, R, Ntilde, nonlinear=nl) for f in traj.fields()])
    F = np.array([interaction_flux(f, kernel, R, Ntilde, nonlinear=nl) for f in traj.fields()])

    def residual(sub):
        idx = np.searchsorted(traj.times, sub.times)
        h = sub.uniform_stride()
        m = M[idx]
        return np.abs((m[2:] - m[:-2]) / (2 * h) - F[idx][1:-1])

    res = residual(traj)
    if len(traj) >= 2 * max(factors) + 1:
        strides, errors, order = stride_convergence(traj, residual, factors)
    else:
        strides, errors, order = np.array([]), np.array([]), float("nan")
    return InteractionFluxReport(traj.times[1:-1], res, strides, errors, order, float(F[0]))


# ---------------------------------------------------------------------------
# compactness trackers


@dataclass(frozen=True)
class CompactnessTrack:
    times: np.ndarray
    N_track: np.ndarray
    x_track: np.ndarray


def track_compactness(traj: Trajectory) -> CompactnessTrack:
    """Empirical frequency scale ``||u_x|| / ||u||`` and circular centroid of ``u^2``."""
    g = traj.grid
    u = traj.snapshots
    m = integrate(u**2, g)
    if np.any(m == 0):
        raise ValueError("zero snapshot has no frequency scale")
    ux = derivative_array(u, g)
    N = np.sqrt(integrate(ux**2, g) / m)
    moment = np.sum(u**2 * np.exp(2j * np.pi * g.x / g.box_length), axis=1)
    xc = np.angle(moment) * g.box_length / (2 * np.pi)
    return CompactnessTrack(traj.times, N, xc)
