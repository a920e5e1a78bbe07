"""Spectral weights of Jacobi matrices with monotone parameters near the
edge of the essential spectrum, and the half-line Schrodinger analog.

The weight obeys | -1/2 log w(x) - g(x) | <= h(x) with g a WKB-type phase sum
up to the turning point and h an explicitly assembled envelope.
"""

from .params import ModelError, MonotoneF, ParameterModel, PotentialModel
from .phases import NoTurningPoint, turning_index
from .wkb import EdgeProfile, envelope, g_sum, h_envelope, turning_point

__version__ = "0.1.0"

__all__ = [
    "EdgeProfile",
    "ModelError",
    "MonotoneF",
    "NoTurningPoint",
    "ParameterModel",
    "PotentialModel",
    "envelope",
    "g_sum",
    "h_envelope",
    "turning_index",
    "turning_point",
]
