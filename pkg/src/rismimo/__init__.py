"""Rate analysis and phase optimization for RIS-assisted uplink massive MIMO with hardware impairments."""

from .hardware import HardwareProfile, DerivedHardware
from .scenario import AngleSet, ConfigError, ScenarioConfig, build_scenario
from .mc_rate import RateReport, ergodic_rate_mc
from .closed_form import closed_form_terms, rate_closed_form, aligned_phases

__version__ = "0.1.0"

__all__ = [
    "AngleSet",
    "ConfigError",
    "DerivedHardware",
    "HardwareProfile",
    "RateReport",
    "ScenarioConfig",
    "aligned_phases",
    "build_scenario",
    "closed_form_terms",
    "ergodic_rate_mc",
    "rate_closed_form",
]
