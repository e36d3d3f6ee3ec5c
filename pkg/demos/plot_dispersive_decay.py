"""
Decay of the free Airy flow
===========================

A datum spread over a wide frequency band has no single decay time scale,
so its sup norm and L^6 norm fall off as clean powers of t until the fastest
wave packets wrap around the box.
"""

# %%
import math

import matplotlib.pyplot as plt
import numpy as np

from gkdv import Grid
from gkdv.data import critical_band
from gkdv.scattering import dispersive_decay_fit

grid = Grid(4096.0, 32768)
times = np.logspace(-2, 2, 60)

# %%
# The fit window opens once the initial transient has passed and closes at
# the wraparound time set by the top of the active band.
fig, ax = plt.subplots()
for p in (math.inf, 6.0):
    u0 = critical_band(grid, xi_min=0.02, xi_max=4.0, p=p)
    rep = dispersive_decay_fit(u0, times, p)
    print(f"p = {p}: exponent {rep.exponent:.4f} (sharp {rep.predicted:.4f}), "
          f"window {rep.window[0]:.3g}..{rep.window[1]:.3g} ({rep.decades:.2f} decades)")
    ax.loglog(rep.times, rep.norms, label=f"p = {p}, slope {rep.exponent:.3f}")
    ax.axvspan(*rep.window, alpha=0.08)
ax.set_xlabel("t")
ax.set_ylabel("L^p norm")
ax.legend()
plt.show()
