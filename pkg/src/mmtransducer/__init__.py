"""Noise spectra of multimode cavity-optomechanical displacement transducers."""
from .kernels import BACKEND
from .model import (
    DriveConfig,
    MechanicalOscillator,
    ModeLadder,
    ReservoirMode,
    SpectrumTrace,
    SystemConfig,
    Unit,
    derive_params,
    mechanical_susceptibility,
    power_for_coupling,
    zpf_reference,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DriveConfig",
    "MechanicalOscillator",
    "ModeLadder",
    "ReservoirMode",
    "SpectrumTrace",
    "SystemConfig",
    "Unit",
    "derive_params",
    "mechanical_susceptibility",
    "power_for_coupling",
    "zpf_reference",
]
