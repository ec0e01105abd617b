"""Non-exponential decay of an unstable state in the box Lee model."""

__version__ = "0.1.0"

from .boost import boosted_amplitude, boosted_probability, deviation_scan, einstein_gamma, gamma_q
from .evolution import (
    amplitude_series,
    channel_probability,
    channel_ratio,
    decay_flux,
    final_amplitude,
    final_probability,
    final_spectrum,
    flux_series,
    survival_amplitude,
    survival_probability,
)
from .model import Channel, EnergyGrid, LeeModel, form_factor, make_model, validate_model
from .quadrature import QuadratureSpec
from .spectral import find_poles, self_energy, spectral_density, zeno_time
from .zeno import DetectorWindow, click_probability, no_click_probability, zeno_scan

__all__ = [
    "Channel",
    "DetectorWindow",
    "EnergyGrid",
    "LeeModel",
    "QuadratureSpec",
    "amplitude_series",
    "boosted_amplitude",
    "boosted_probability",
    "channel_probability",
    "channel_ratio",
    "click_probability",
    "decay_flux",
    "deviation_scan",
    "einstein_gamma",
    "final_amplitude",
    "final_probability",
    "final_spectrum",
    "find_poles",
    "flux_series",
    "form_factor",
    "gamma_q",
    "make_model",
    "no_click_probability",
    "self_energy",
    "spectral_density",
    "survival_amplitude",
    "survival_probability",
    "validate_model",
    "zeno_scan",
    "zeno_time",
]
