"""Numerical laboratory for the defocusing mass-critical gKdV equation ``u_t + u_xxx = (u^5)_x``."""

from .spectral import Grid, Field, Shell, LowPass, HighPass
from .solver import SolverConfig, Trajectory, BlowupError, evolve, rescale

__version__ = "0.1.0"

__all__ = ["Grid", "Field", "Shell", "LowPass", "HighPass", "SolverConfig", "Trajectory", "BlowupError", "evolve", "rescale"]
