"""Small numerical helpers shared across modules."""

from __future__ import annotations

import numpy as np


def smooth_step(s):
    """C-infinity step: 0 for ``s <= 0``, 1 for ``s >= 1``, built from ``exp(-1/s)``.

    Satisfies ``smooth_step(1 - s) = 1 - smooth_step(s)``.
    """
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(over="ignore", divide="ignore"):
        a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        r = 1.0 - s
        b = np.where(r > 0, np.exp(-1.0 / np.where(r > 0, r, 1.0)), 0.0)
    return a / (a + b)


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``; nan unless all positive."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(x > 0) and np.all(y > 0)):
        return float("nan")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def stride_convergence(traj, residual_fn, factors=(4, 2, 1)):
    """Refinement study of an interior-snapshot residual in the recording stride.

    ``residual_fn(traj)`` must return one value per interior snapshot.  The
    trajectory is subsampled by each factor; residuals are compared at the
    interior times of the coarsest recording, which every finer one contains.

    Returns
    -------
    strides, errors, order
        Recording strides, max residual over the common times, and the fitted
        log-log slope of error against stride.
    """
    factors = sorted(factors, reverse=True)
    coarse = traj.subsample(factors[0])
    common = coarse.times[1:-1]
    if common.size == 0:
        raise ValueError("trajectory too short for the coarsest stride")
    strides, errors = [], []
    for f in factors:
        sub = traj.subsample(f)
        res = np.asarray(residual_fn(sub))
        interior = sub.times[1:-1]
        idx = np.searchsorted(interior, common)
        strides.append(sub.uniform_stride())
        errors.append(float(np.max(res[idx])))
    return np.array(strides), np.array(errors), loglog_slope(strides, errors)
