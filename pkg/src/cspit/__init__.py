"""Characteristic-time analysis and simulation of an NDN router's CS and PIT."""
from .experiments import ResultRow, Scenario, emit_csv, load_config, preset, run_scenario
from .renewal import fit_residual, renewal_function, residual_moments
from .sim import SimConfig, SimReport, replicate, run
from .solver import SolveResult, SystemConfig, solve
from .traffic import RenewalSpec, TrafficKind, ZipfCatalog

__all__ = [
    "RenewalSpec", "TrafficKind", "ZipfCatalog",
    "renewal_function", "residual_moments", "fit_residual",
    "SystemConfig", "SolveResult", "solve",
    "SimConfig", "SimReport", "run", "replicate",
    "Scenario", "ResultRow", "load_config", "preset", "run_scenario", "emit_csv",
]
