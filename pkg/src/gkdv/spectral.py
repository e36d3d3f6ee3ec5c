"""Periodic grid, Fourier transforms and Fourier multipliers.

The real line is replaced by the box ``[-L/2, L/2)`` sampled at ``n`` equally
spaced points ``x_i = -L/2 + i*dx``.  The continuous transform convention is

    u_hat(xi) = int u(x) exp(-i xi x) dx,      u(x) = (1/2pi) int u_hat exp(i xi x) dxi,

discretised as ``u_hat_k = dx * sum_i u_i exp(-i xi_k x_i)``.  With this choice
``int |u|^2 dx = (1/L) sum_k |u_hat_k|^2`` (Parseval on the box) and the
derivative is the multiplier ``i*xi``.  The free Airy group ``exp(-t d_x^3)``
is therefore the phase ``exp(+i t xi^3)``.

Odd multipliers (derivatives of odd order, the Airy phase) act as zero on the
unpaired Nyquist mode so that real fields stay real and the Airy group stays
exactly unitary.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable, Union

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "Field",
    "Spectrum",
    "Shell",
    "LowPass",
    "HighPass",
    "forward_transform",
    "inverse_transform",
    "airy_propagate",
    "airy_propagate_array",
    "derivative",
    "derivative_array",
    "fractional_derivative",
    "fractional_derivative_array",
    "lp_project",
    "shell_indices",
    "shell_norms",
    "integrate",
    "l2_norm",
]

# Opt-in thread count for the transform layer; one worker keeps runs bit-reproducible.
FFT_WORKERS = 1


def _rfft(u: np.ndarray) -> np.ndarray:
    return sfft.rfft(u, axis=-1, workers=FFT_WORKERS)


def _irfft(c: np.ndarray, n: int) -> np.ndarray:
    return sfft.irfft(c, n, axis=-1, workers=FFT_WORKERS)


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L/2, L/2)``."""

    box_length: float = 256.0
    n_points: int = 1024

    def __post_init__(self):
        if not (np.isfinite(self.box_length) and self.box_length > 0):
            raise ValueError(f"box_length must be positive, got {self.box_length}")
        n = int(self.n_points)
        if n != self.n_points or n < 4 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 4, got {self.n_points}")
        object.__setattr__(self, "box_length", float(self.box_length))
        object.__setattr__(self, "n_points", n)

    @property
    def spacing(self) -> float:
        return self.box_length / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        x = -0.5 * self.box_length + self.spacing * np.arange(self.n_points)
        x.setflags(write=False)
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Full FFT-ordered wavenumbers ``2 pi k / L``; index ``n/2`` is the Nyquist mode."""
        xi = 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)
        xi.setflags(write=False)
        return xi

    @cached_property
    def rwavenumbers(self) -> np.ndarray:
        """Non-negative wavenumbers matching the real-transform layout."""
        xi = 2 * np.pi * np.fft.rfftfreq(self.n_points, d=self.spacing)
        xi.setflags(write=False)
        return xi

    @property
    def xi_max(self) -> float:
        """Largest resolved wavenumber (the Nyquist frequency ``pi/dx``)."""
        return np.pi / self.spacing

    @property
    def xi_min(self) -> float:
        """Smallest nonzero wavenumber ``2 pi / L``."""
        return 2 * np.pi / self.box_length

    def odd_symbol_mask(self) -> np.ndarray:
        """Real-layout mask that is 0 on the Nyquist mode and 1 elsewhere."""
        mask = np.ones(self.n_points // 2 + 1)
        mask[-1] = 0.0
        return mask

    def field(self, samples) -> "Field":
        return Field(self, samples)

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.n_points))


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples ``u(x_i)`` on a :class:`Grid`. Immutable."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        u = np.array(self.samples, dtype=float)
        if u.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {u.shape}"
            )
        if not np.all(np.isfinite(u)):
            raise ValueError("field samples must be finite")
        u.setflags(write=False)
        object.__setattr__(self, "samples", u)

    def __add__(self, other):
        if isinstance(other, Field):
            _same_grid(self, other)
            return Field(self.grid, self.samples + other.samples)
        return Field(self.grid, self.samples + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            _same_grid(self, other)
            return Field(self.grid, self.samples - other.samples)
        return Field(self.grid, self.samples - other)

    def __mul__(self, c):
        if isinstance(c, Field):
            _same_grid(self, c)
            return Field(self.grid, self.samples * c.samples)
        return Field(self.grid, self.samples * c)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.samples)

    def __pow__(self, m):
        return Field(self.grid, self.samples**m)

    def sup(self) -> float:
        return float(np.max(np.abs(self.samples)))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Discrete Fourier coefficients ``u_hat(xi_k)`` in FFT order."""

    grid: Grid
    coeffs: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} coefficients, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def hermitian_defect(self) -> float:
        """max |c(-xi) - conj c(xi)|, relative to max |c|."""
        c = self.coeffs
        mirrored = np.conj(np.roll(c[::-1], 1))
        scale = np.max(np.abs(c))
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(c - mirrored)) / scale)

    def power(self) -> float:
        """``(1/L) sum |c_k|^2``, equal to ``int u^2`` by Parseval."""
        return float(np.sum(np.abs(self.coeffs) ** 2) / self.grid.box_length)


def _same_grid(a: Field, b: Field):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def _phase(grid: Grid) -> np.ndarray:
    # exp(-i xi_k x_0) with x_0 = -L/2 reduces to (-1)^k
    k = np.fft.fftfreq(grid.n_points, d=1.0 / grid.n_points).astype(int)
    return np.where(k % 2 == 0, 1.0, -1.0)


def forward_transform(f: Field) -> Spectrum:
    """Discrete approximation of ``int u(x) exp(-i xi x) dx`` at every grid wavenumber."""
    g = f.grid
    c = g.spacing * _phase(g) * sfft.fft(f.samples, workers=FFT_WORKERS)
    return Spectrum(g, c)


def inverse_transform(s: Spectrum, tol: float = 1e-8) -> Field:
    """Inverse of :func:`forward_transform`.

    Raises
    ------
    ValueError
        If the spectrum is not Hermitian within ``tol`` (relative), i.e. does
        not describe a real field.
    """
    defect = s.hermitian_defect()
    if defect > tol:
        raise ValueError(f"spectrum is not Hermitian (defect {defect:.3e} > {tol:g})")
    g = s.grid
    u = sfft.ifft(s.coeffs * _phase(g), workers=FFT_WORKERS) / g.spacing
    return Field(g, u.real)


def _apply_symbol(u: np.ndarray, grid: Grid, symbol: np.ndarray) -> np.ndarray:
    return _irfft(_rfft(u) * symbol, grid.n_points)


def airy_propagate_array(u: np.ndarray, grid: Grid, t) -> np.ndarray:
    """Array version of :func:`airy_propagate`.

    ``t`` may be a scalar or a 1-D array matching the leading axis of ``u``.
    """
    xi = grid.rwavenumbers
    t = np.asarray(t, dtype=float)
    phase = np.exp(1j * np.multiply.outer(t, xi**3) * grid.odd_symbol_mask())
    return _irfft(_rfft(u) * phase, grid.n_points)


def airy_propagate(f: Field, t: float) -> Field:
    """Free Airy group ``exp(-t d_x^3) f``, i.e. the multiplier ``exp(i t xi^3)``."""
    if t == 0:
        return f
    return Field(f.grid, airy_propagate_array(f.samples, f.grid, t))


def derivative_array(u: np.ndarray, grid: Grid, order: int = 1) -> np.ndarray:
    symbol = (1j * grid.rwavenumbers) ** order
    if order % 2:
        symbol = symbol * grid.odd_symbol_mask()
    return _apply_symbol(u, grid, symbol)


def derivative(f: Field, order: int = 1) -> Field:
    """Spectral derivative ``d_x^order f``."""
    return Field(f.grid, derivative_array(f.samples, f.grid, order))


def _fractional_symbol(grid: Grid, alpha: float) -> np.ndarray:
    xi = grid.rwavenumbers
    if alpha == 0:
        return np.ones_like(xi)
    symbol = np.zeros_like(xi)
    symbol[1:] = xi[1:] ** alpha
    return symbol


def fractional_derivative_array(u: np.ndarray, grid: Grid, alpha: float) -> np.ndarray:
    if alpha == 0:
        return np.array(u, dtype=float)
    return _apply_symbol(u, grid, _fractional_symbol(grid, alpha))


def fractional_derivative(f: Field, alpha: float) -> Field:
    """``D^alpha f`` with symbol ``|xi|^alpha``.

    The zero mode is annihilated for ``alpha != 0`` (for negative ``alpha`` the
    symbol is singular there) and kept for ``alpha == 0``.
    """
    return Field(f.grid, fractional_derivative_array(f.samples, f.grid, alpha))


@dataclass(frozen=True)
class Shell:
    """Dyadic shell ``2^k <= |xi| < 2^(k+1)``."""

    k: int

    def mask(self, xi: np.ndarray) -> np.ndarray:
        a = np.abs(xi)
        return (a >= 2.0**self.k) & (a < 2.0 ** (self.k + 1))


@dataclass(frozen=True)
class LowPass:
    """``|xi| <= N`` (contains the zero mode)."""

    N: float

    def mask(self, xi: np.ndarray) -> np.ndarray:
        return np.abs(xi) <= self.N


@dataclass(frozen=True)
class HighPass:
    """``|xi| > N``."""

    N: float

    def mask(self, xi: np.ndarray) -> np.ndarray:
        return np.abs(xi) > self.N


Band = Union[Shell, LowPass, HighPass]


def lp_project(f: Field, band: Band) -> Field:
    """Sharp Littlewood-Paley projection onto ``band``.

    A band containing no grid wavenumber yields the zero field.
    """
    mask = band.mask(f.grid.rwavenumbers).astype(float)
    return Field(f.grid, _apply_symbol(f.samples, f.grid, mask))


def shell_indices(grid: Grid) -> np.ndarray:
    """Indices ``k`` of every dyadic shell holding at least one grid wavenumber."""
    k_lo = int(np.floor(np.log2(grid.xi_min)))
    k_hi = int(np.floor(np.log2(grid.xi_max)))
    ks = np.arange(k_lo, k_hi + 1)
    xi = grid.rwavenumbers[1:]
    occupied = [np.any(Shell(int(k)).mask(xi)) for k in ks]
    return ks[np.array(occupied, dtype=bool)]


def shell_norms(f: Field, ks=None) -> np.ndarray:
    """``||P_{2^k} f||_{L^2}`` for each shell index in ``ks`` (default: all resolvable)."""
    if ks is None:
        ks = shell_indices(f.grid)
    return np.array([l2_norm(lp_project(f, Shell(int(k)))) for k in ks])


def integrate(f: Union[Field, np.ndarray], grid: Grid = None) -> float:
    """Rectangle rule ``sum f(x_i) dx`` (the trapezoid rule on a periodic grid)."""
    if isinstance(f, Field):
        return float(np.sum(f.samples) * f.grid.spacing)
    if grid is None:
        raise TypeError("a grid is required to integrate a raw array")
    out = np.sum(f, axis=-1) * grid.spacing
    return float(out) if np.ndim(out) == 0 else out


def l2_norm(f: Field) -> float:
    return float(np.sqrt(np.sum(f.samples**2) * f.grid.spacing))


def apply_multiplier(f: Field, symbol: Callable[[np.ndarray], np.ndarray]) -> Field:
    """Apply an even real symbol ``m(xi)`` given as a callable on ``|xi|``."""
    return Field(f.grid, _apply_symbol(f.samples, f.grid, symbol(f.grid.rwavenumbers)))
