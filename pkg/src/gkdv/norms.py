"""Space-time norms: mixed Lebesgue norms, scattering size, S^0, V^p and envelopes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .solver import Trajectory
from .spectral import (
    Field,
    airy_propagate_array,
    fractional_derivative_array,
    shell_indices,
    shell_norms,
)

__all__ = [
    "AdmissibleTriple",
    "EnvelopeParams",
    "CANONICAL_TRIPLES",
    "is_admissible",
    "mixed_norm_x_t",
    "mixed_norm_t_x",
    "scattering_size",
    "s0_norm",
    "s0_components",
    "vp_norm",
    "frequency_envelope",
    "trapezoid_weights",
]

INF = math.inf
Exponent = Union[int, float, Fraction, str]


def _to_fraction(v: Exponent) -> Optional[Fraction]:
    """Exact rational for a finite exponent, ``None`` for infinity."""
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "infinity", "oo"):
            return None
        return Fraction(v.strip())
    if isinstance(v, Rational):
        return Fraction(v)
    if math.isinf(v):
        return None
    # floats are read as the nearest simple rational, so 24/5 == 4.8 works
    return Fraction(v).limit_denominator(10**6)


def _recip(v: Optional[Fraction]) -> Fraction:
    return Fraction(0) if v is None else 1 / v


@dataclass(frozen=True)
class AdmissibleTriple:
    """Exponents with ``1/p + 1/(2q) = 1/4`` and ``alpha = 2/q - 1/p``.

    ``p`` and ``q`` are exact rationals, or ``None`` for infinity.
    """

    p: Optional[Fraction]
    q: Optional[Fraction]
    alpha: Fraction

    @property
    def p_float(self) -> float:
        return INF if self.p is None else float(self.p)

    @property
    def q_float(self) -> float:
        return INF if self.q is None else float(self.q)

    def __str__(self):
        fmt = lambda v: "inf" if v is None else str(v)
        return f"({fmt(self.p)}, {fmt(self.q)}, {self.alpha})"


def is_admissible(p: Exponent, q: Exponent) -> Optional[AdmissibleTriple]:
    """Return the admissible triple for ``(p, q)``, or ``None`` if the pair is not admissible.

    All arithmetic is exact over the rationals.
    """
    fp, fq = _to_fraction(p), _to_fraction(q)
    for v in (fp, fq):
        if v is not None and v < 1:
            return None
    ip, iq = _recip(fp), _recip(fq)
    if ip + iq / 2 != Fraction(1, 4):
        return None
    alpha = 2 * iq - ip
    if not (Fraction(-1, 4) <= alpha <= 1):
        return None
    return AdmissibleTriple(fp, fq, alpha)


CANONICAL_TRIPLES: Tuple[AdmissibleTriple, ...] = tuple(
    is_admissible(p, q)
    for p, q in [("inf", 2), (6, 6), (5, 10), ("24/5", 12), (4, "inf")]
)


def trapezoid_weights(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    w = np.zeros_like(t)
    d = np.diff(t)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def _lp_reduce(a: np.ndarray, p: float, weights, axis: int) -> np.ndarray:
    """``(sum_w |a|^p)^(1/p)`` along ``axis``; ``p = inf`` is the max. ``a`` is nonnegative."""
    if math.isinf(p):
        return np.max(a, axis=axis)
    w = np.asarray(weights)
    return np.sum(w * a**p, axis=axis) ** (1.0 / p)


def _mixed(u: np.ndarray, times: np.ndarray, dx: float, p: float, q: float, x_first: bool) -> float:
    if len(times) < 2 and not (math.isinf(q) if x_first else math.isinf(p)):
        raise ValueError("a single snapshot has no time extent for a finite time exponent")
    for v in (p, q):
        if not v >= 1:
            raise ValueError(f"exponents must lie in [1, inf], got {v}")
    a = np.abs(u)
    scale = a.max() if a.size else 0.0
    if scale == 0:
        return 0.0
    a = a / scale
    wt = trapezoid_weights(times)[:, None]
    if x_first:
        inner = _lp_reduce(a, q, wt, axis=0)  # L^q in t at each x
        return scale * float(_lp_reduce(inner, p, dx, axis=0))
    inner = _lp_reduce(a, q, dx, axis=1)  # L^q in x at each t
    return scale * float(_lp_reduce(inner, p, wt[:, 0], axis=0))


def mixed_norm_x_t(traj: Trajectory, p: float, q: float) -> float:
    """``|| u ||_{L^p_x L^q_t}``: L^q over time inside, L^p over space outside.

    Time integrals use trapezoid weights over the recorded snapshots; an infinite
    exponent is the maximum over samples, which under-resolves suprema between them.
    """
    return _mixed(traj.snapshots, traj.times, traj.grid.spacing, float(p), float(q), True)


def mixed_norm_t_x(traj: Trajectory, p: float, q: float) -> float:
    """``|| u ||_{L^p_t L^q_x}``: L^q over space inside, L^p over time outside."""
    return _mixed(traj.snapshots, traj.times, traj.grid.spacing, float(p), float(q), False)


def scattering_size(traj: Trajectory) -> float:
    """``int (int |u|^10 dt)^(1/2) dx``, the fifth power of the L^5_x L^10_t norm."""
    if len(traj) < 2:
        raise ValueError("scattering_size needs at least 2 snapshots")
    return mixed_norm_x_t(traj, 5, 10) ** 5


def s0_components(traj: Trajectory, triples: Sequence[AdmissibleTriple] = CANONICAL_TRIPLES) -> dict:
    """``|| D^alpha u ||_{L^p_x L^q_t}`` for each triple, keyed by ``str(triple)``."""
    out = {}
    for tr in triples:
        alpha = float(tr.alpha)
        v = traj.map(lambda u: fractional_derivative_array(u, traj.grid, alpha)) if alpha else traj
        out[str(tr)] = mixed_norm_x_t(v, tr.p_float, tr.q_float)
    return out


def s0_norm(traj: Trajectory, triples: Sequence[AdmissibleTriple] = CANONICAL_TRIPLES) -> float:
    """Maximum of the admissible Strichartz norms over a finite family of triples.

    The default family is ``(inf,2,1), (6,6,1/6), (5,10,0), (24/5,12,-1/24), (4,inf,-1/4)``;
    the result is a lower bound for the supremum over all admissible triples.
    """
    if len(traj) < 2:
        raise ValueError("s0_norm needs at least 2 snapshots")
    return max(s0_components(traj, triples).values())


def _as_snapshots(snapshots) -> Tuple[np.ndarray, np.ndarray, object]:
    if isinstance(snapshots, Trajectory):
        return snapshots.times, snapshots.snapshots, snapshots.grid
    pairs = list(snapshots)
    if not pairs:
        raise ValueError("no snapshots")
    grid = pairs[0][1].grid
    times = np.array([float(t) for t, _ in pairs])
    data = np.array([f.samples for _, f in pairs])
    return times, data, grid


def vp_norm(snapshots, p: float = 2.0) -> float:
    """Discrete ``V^p`` variation norm of the Airy-pulled-back profile.

    Each snapshot is pulled back to ``g_j = exp(t_j d^3) v(t_j)``.  The supremum over
    increasing partitions of ``sum ||g_{i_{m+1}} - g_{i_m}||^p`` is a maximum-weight
    chain in the DAG on time-ordered samples, solved by O(n^2) dynamic programming.

    Parameters
    ----------
    snapshots : Trajectory or iterable of (time, Field)
    p : float
        Exponent, at least 1.
    """
    if not p >= 1:
        raise ValueError("p must be >= 1")
    times, data, grid = _as_snapshots(snapshots)
    if times.size < 2:
        raise ValueError("vp_norm needs at least 2 snapshots")
    if np.unique(times).size != times.size:
        raise ValueError("snapshot times must be distinct")
    order = np.argsort(times)
    times, data = times[order], data[order]
    profiles = airy_propagate_array(data, grid, -times)
    n = times.size
    best = np.zeros(n)
    for j in range(1, n):
        diff = profiles[:j] - profiles[j]
        w = np.sqrt(np.sum(diff**2, axis=1) * grid.spacing) ** p
        best[j] = max(0.0, float(np.max(best[:j] + w)))
    return float(np.max(best) ** (1.0 / p))


@dataclass(frozen=True)
class EnvelopeParams:
    delta: float = 1.0 / 40.0

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


def frequency_envelope(f: Field, params: EnvelopeParams = EnvelopeParams()) -> list:
    """``alpha(k) = sum_j 2^(-delta |j-k|) ||P_{2^j} f||`` for every resolvable dyadic shell.

    Returns a list of ``(k, alpha_k)`` pairs in increasing ``k``.
    """
    ks = shell_indices(f.grid)
    m = shell_norms(f, ks)
    weights = 2.0 ** (-params.delta * np.abs(ks[:, None] - ks[None, :]))
    alpha = weights @ m
    return [(int(k), float(a)) for k, a in zip(ks, alpha)]
