"""Non-local Follow-the-Leader traffic on a ring and its LWR continuum limit."""

from .dynamics import RingState, euler_step, rk4_step, simulate, speeds
from .eulerian import InitialProfile, density_field, equal_mass_partition, figure1_profile
from .godunov import UniformGrid, godunov_flux, solve
from .velocity import WeightProfile, greenshields, power_law

__all__ = [
    "RingState", "euler_step", "rk4_step", "simulate", "speeds",
    "InitialProfile", "density_field", "equal_mass_partition", "figure1_profile",
    "UniformGrid", "godunov_flux", "solve",
    "WeightProfile", "greenshields", "power_law",
]
