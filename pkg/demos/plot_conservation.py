"""
Mass and energy along a defocusing run
======================================

A unit-mass gaussian is evolved for ten time units.  Mass and energy should
stay flat to the level of the time-stepping error.
"""

# %%
import matplotlib.pyplot as plt
import numpy as np

from gkdv import Grid, SolverConfig, evolve
from gkdv.conservation import energy, mass
from gkdv.data import gaussian

grid = Grid(256.0, 1024)
u0 = gaussian(grid, width=1.0, l2=1.0)
traj = evolve(u0, SolverConfig(dt=0.0025, t_final=10.0, record_stride=40))

# %%
# Relative drift of both invariants.  The energy carries the sextic term, so
# it is the more sensitive of the two.
m = np.array([mass(f) for f in traj.fields()])
e = np.array([energy(f) for f in traj.fields()])
print(f"mass drift   {np.max(np.abs(m / m[0] - 1)):.2e}")
print(f"energy drift {np.max(np.abs(e / e[0] - 1)):.2e}")
print(f"largest edge mass fraction {traj.provenance['edge_mass_max']:.1e}")

fig, ax = plt.subplots()
ax.semilogy(traj.times[1:], np.abs(m / m[0] - 1)[1:], label="mass")
ax.semilogy(traj.times[1:], np.abs(e / e[0] - 1)[1:], label="energy")
ax.set_xlabel("t")
ax.set_ylabel("relative drift")
ax.legend()

# %%
# The solution disperses into a left-moving Airy tail.
fig, ax = plt.subplots()
for k in (0, len(traj) // 4, len(traj) - 1):
    ax.plot(grid.x, traj.snapshots[k], label=f"t = {traj.times[k]:.1f}")
ax.set_xlim(-80, 20)
ax.legend()
plt.show()
