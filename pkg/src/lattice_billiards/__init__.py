"""Integrable billiards: lattice-built periodic orbits, closed-form spectra, and numerical checks."""
from .domains import DomainId, DomainSpec, InvalidInput, catalog, genus, get_domain, is_integrable
from .orbits import (
    TerminalOrbit,
    amplitude_squared,
    collision_count,
    enumerate_orbits,
    fold_trajectory,
    orbit_vector,
    shooting_angles,
)
from .raytrace import OracleDisagreement, trace, verify_label
from .spectra import BoundaryCondition, energy, spectrum

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "DomainId",
    "DomainSpec",
    "InvalidInput",
    "OracleDisagreement",
    "TerminalOrbit",
    "amplitude_squared",
    "catalog",
    "collision_count",
    "energy",
    "enumerate_orbits",
    "fold_trajectory",
    "genus",
    "get_domain",
    "is_integrable",
    "orbit_vector",
    "shooting_angles",
    "spectrum",
    "trace",
    "verify_label",
]
