"""Delayed stage-structured predator-prey model: simulation, stability switches, Hopf analysis."""
from __future__ import annotations

from .dde import Trajectory, check_boundedness, check_positivity, reconstruct_z1, simulate
from .errors import StagechainError
from .hopf import HopfReport, analyze_crossing, hopf_at_switches
from .linstab import boundary_spectrum, char_coeffs, routh_hurwitz_tau0
from .model import (
    BOUNDARY_PARAMS, CHAOS_PARAMS, REFERENCE_PARAMS, Equilibrium, ModelParams, compute_equilibria,
    existence_thresholds,
)
from .orbit import OrbitClass, bifurcation_sweep, classify_orbit, largest_lyapunov
from .switch import SwitchReport, find_switches

__all__ = [
    "BOUNDARY_PARAMS", "CHAOS_PARAMS", "REFERENCE_PARAMS", "Equilibrium", "HopfReport", "ModelParams",
    "OrbitClass", "StagechainError", "SwitchReport", "Trajectory", "analyze_crossing",
    "bifurcation_sweep", "boundary_spectrum", "char_coeffs", "check_boundedness",
    "check_positivity", "classify_orbit", "compute_equilibria", "existence_thresholds",
    "find_switches", "hopf_at_switches", "largest_lyapunov", "reconstruct_z1",
    "routh_hurwitz_tau0", "simulate",
]
