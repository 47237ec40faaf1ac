"""Bootstrap percolation on tori: dynamics, exact extremal counts, and Monte Carlo."""

__version__ = "0.1.0"

from .dynamics import Configuration, Rule, closure, percolation_time, protected_sites, step, trajectory
from .geometry import CompatibilityFunction, Lattice

__all__ = [
    "CompatibilityFunction",
    "Configuration",
    "Lattice",
    "Rule",
    "closure",
    "percolation_time",
    "protected_sites",
    "step",
    "trajectory",
]
