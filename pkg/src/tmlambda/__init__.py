"""Zeeman-split three-level Lambda systems in Tm:YAG.

Site geometry, effective-field branching ratios, field-orientation
optimisation, gyromagnetic tensor fitting and hole-burning spectra.
"""

from .errors import (
    AntiparallelFields,
    ComputationError,
    ConfigError,
    DegenerateField,
    InconsistentData,
    NoInteriorMaximum,
    WindowTooNarrow,
)
from .zeeman import GyroTensor

# Theoretical crystal-field values (MHz/T): gamma_y with gx/gy and gz/gy ratios
THEORY_GROUND = GyroTensor.from_ratios(560.0, 0.033, 0.02, "ground")
THEORY_EXCITED = GyroTensor.from_ratios(75.0, 0.3, 0.080, "excited")

__all__ = [
    "AntiparallelFields",
    "ComputationError",
    "ConfigError",
    "DegenerateField",
    "GyroTensor",
    "InconsistentData",
    "NoInteriorMaximum",
    "THEORY_EXCITED",
    "THEORY_GROUND",
    "WindowTooNarrow",
]
