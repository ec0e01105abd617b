"""Decay of an unstable state carrying a definite momentum ``q`` (c = 1)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolution import _as_times, _spec, _transform
from .quadrature import QuadratureSpec
from .spectral import SpectralDensity

DEVIATION_DEFINITION = "(gamma_q - gamma_einstein) / m0"


@dataclass(frozen=True)
class WidthComparison:
    q: float
    gamma_q: float
    gamma_einstein: float
    deviation: float


@dataclass(frozen=True)
class DeviationScan:
    rows: list[WidthComparison]
    q_argmax: float
    max_abs_deviation: float


def boosted_amplitude(sd: SpectralDensity, t, q: float, spec: QuadratureSpec | None = None):
    """``a(t, q) = int dD(m) exp(-i sqrt(m^2 + q^2) t)``.

    The relativistic energy is not monotone through ``m = 0``, so that point
    is a mandatory panel boundary when the continuum reaches negative masses.
    """
    if q < 0:
        raise ValueError(f"momentum must be non-negative, got {q}")
    q2 = float(q) ** 2

    def energy(m):
        return np.sqrt(m * m + q2)

    times, scalar = _as_times(t)
    a = _transform(sd, times, energy, _spec(sd, spec), extra_points=(0.0,))
    return complex(a) if scalar else a


def boosted_probability(sd: SpectralDensity, t, q: float, spec: QuadratureSpec | None = None):
    a = boosted_amplitude(sd, t, q, spec)
    return float(abs(a) ** 2) if np.ndim(a) == 0 else np.abs(a) ** 2


def gamma_q(m0: float, gamma: float, q: float) -> float:
    """Exponential-limit width of the state moving with momentum ``q``.

    Evaluates ``sqrt(2) * sqrt(sqrt(A^2 + m0^2 gamma^2) - A)`` with
    ``A = m0^2 - gamma^2/4 + q^2``; for ``A > 0`` the difference is rewritten as
    ``m0^2 gamma^2 / (sqrt(A^2 + m0^2 gamma^2) + A)`` to avoid cancellation.
    """
    if m0 <= 0 or gamma < 0 or q < 0:
        raise ValueError(f"need m0 > 0, gamma >= 0, q >= 0; got {m0}, {gamma}, {q}")
    a = m0 * m0 - 0.25 * gamma * gamma + q * q
    mg = m0 * gamma
    root = math.hypot(a, mg)
    if a > 0:
        # mg is kept outside the square root so tiny widths do not underflow
        return mg * math.sqrt(2.0 / (root + a))
    return math.sqrt(2.0 * (root - a))


def einstein_gamma(m0: float, gamma: float, q: float) -> float:
    """Time-dilated width ``gamma * m0 / sqrt(q^2 + m0^2)``."""
    return gamma / math.hypot(q / m0, 1.0)


def compare_widths(m0: float, gamma: float, q: float) -> WidthComparison:
    gq = gamma_q(m0, gamma, q)
    ge = einstein_gamma(m0, gamma, q)
    return WidthComparison(float(q), gq, ge, (gq - ge) / m0)


def deviation_scan(m0: float, gamma: float, q_grid) -> DeviationScan:
    """Compare the two widths on ``q_grid`` and locate the largest deviation.

    The grid should cover ``[0, 3 m0]`` for the maximum to be bracketed.
    """
    rows = [compare_widths(m0, gamma, float(q)) for q in np.asarray(q_grid, dtype=float)]
    if not rows:
        raise ValueError("empty q grid")
    best = max(rows, key=lambda r: abs(r.deviation))
    return DeviationScan(rows, best.q, abs(best.deviation))
