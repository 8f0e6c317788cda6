"""Numerical laboratory for a deformed Kepler-Coulomb family and its oscillator partner."""

__version__ = "0.1.0"

from .systems import (  # noqa: F401
    DC_CHART,
    TTW_CHART,
    DCParams,
    PhasePoint,
    RationalIndex,
    TTWParams,
)
