"""Numerical toolkit for symplectic and pseudo-unitary cocycles.

Lyapunov spectra, Siegel-disc Möbius dynamics, m-functions, rotation
functions, strip Schrödinger operators and periodic bands.
"""
from .bands import band_scan, canonical_pair_normalize, classify_theta, pair_ratio_diagnostic, spectral_projection
from .cocycle import Cocycle, FiniteShift, Periodic, TorusRotation, lyapunov_spectrum
from .errors import CocycleError
from .families import EnergyFamily, RotationFamily
from .groups import GroupTag, cayley_conjugate, is_in_group, random_group_element
from .kotani import boundary_gap_diagnostics, m_minus, m_plus, theorem5_diagnostics, trace_gap
from .perturbation import PerturbationPair, contraction_condition, density_search, phi_epsilon
from .rotation import rotation_function
from .strip import StripPotential, energy_scan, transfer_cocycle

__version__ = "0.1.0"

__all__ = [
    "Cocycle",
    "CocycleError",
    "EnergyFamily",
    "FiniteShift",
    "GroupTag",
    "Periodic",
    "PerturbationPair",
    "RotationFamily",
    "StripPotential",
    "TorusRotation",
    "band_scan",
    "boundary_gap_diagnostics",
    "canonical_pair_normalize",
    "cayley_conjugate",
    "classify_theta",
    "contraction_condition",
    "density_search",
    "energy_scan",
    "is_in_group",
    "lyapunov_spectrum",
    "m_minus",
    "m_plus",
    "pair_ratio_diagnostic",
    "phi_epsilon",
    "random_group_element",
    "rotation_function",
    "spectral_projection",
    "theorem5_diagnostics",
    "trace_gap",
    "transfer_cocycle",
]
