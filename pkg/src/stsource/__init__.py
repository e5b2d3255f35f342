# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
"""Model-based identification of spatio-temporal sources in 1-D parabolic systems."""

from .errors import (
    DivergenceError,
    InfeasibleDesignError,
    NumericalError,
    SpectrumError,
    StsourceError,
    ValidationError,
)
from .pde_core import PdeSystem, SpatioTemporalField, heat_rod
from .scenarios import Scenario, published_scenario, reproduce_table1, run_scenario

__version__ = "0.1.0"

__all__ = [
    "DivergenceError",
    "InfeasibleDesignError",
    "NumericalError",
    "PdeSystem",
    "Scenario",
    "SpatioTemporalField",
    "SpectrumError",
    "StsourceError",
    "ValidationError",
    "heat_rod",
    "published_scenario",
    "reproduce_table1",
    "run_scenario",
]
