"""Repeated instantaneous measurements with an energy-window detector.

The detector clicks only for decay products with energy in
``[center - half_width, center + half_width]``.  After a silent measurement
the system is taken to be back in the undecayed state, so with ``n``
measurements spaced by ``tau``

    p_noclick(n tau) = 1 - w(tau) * (1 - p(tau)^n) / (1 - p(tau))

where ``p`` is the free survival probability and ``w`` the click probability
of a single measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .evolution import final_probability, survival_probability
from .quadrature import QuadratureSpec
from .spectral import SpectralDensity

ROUNDOFF = 1e-9


@dataclass(frozen=True)
class DetectorWindow:
    half_width: float
    center: float | None = None

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError(f"detector half-width must be positive, got {self.half_width}")

    def bounds(self, m0: float) -> tuple[float, float]:
        c = m0 if self.center is None else self.center
        return c - self.half_width, c + self.half_width


@dataclass(frozen=True)
class MeasurementProtocol:
    tau: float
    n: int

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class ZenoRow:
    tau: float
    n: int
    p_tau: float
    w_lambda: float
    p_noclick: float
    rounding: float  # n * tau - t_total


@dataclass(frozen=True)
class ZenoScan:
    rows: list[ZenoRow]
    t_total: float
    # steps ordered by decreasing tau; positive when p_noclick grows
    steps: list[float] = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        """True when p_noclick never drops by more than 1e-6 as tau shrinks."""
        return all(s >= -1e-6 for s in self.steps)


def click_probability(
    sd: SpectralDensity,
    window: DetectorWindow,
    tau: float,
    spec: QuadratureSpec | None = None,
) -> float:
    """Probability that a measurement at ``tau`` finds a decay product in the window."""
    if tau == 0:
        return 0.0
    return final_probability(sd, tau, window=window.bounds(sd.model.m0), spec=spec)


def _geometric(p: float, n: int) -> float:
    # (1 - p^n) / (1 - p) without cancellation for p close to 1
    if p == 1:
        return float(n)
    if p == 0:
        return 1.0
    return -math.expm1(n * math.log(p)) / (1.0 - p)


def no_click_probability(p_tau: float, w_lambda: float, n: int) -> float:
    """Probability of ``n`` consecutive silent measurements.

    Raises
    ------
    DomainError
        ``p_tau`` or ``w_lambda`` outside [0, 1], or ``n < 1``.
    """
    if not 0 <= p_tau <= 1:
        raise DomainError(f"p_tau must lie in [0, 1], got {p_tau}")
    if not 0 <= w_lambda <= 1:
        raise DomainError(f"w_lambda must lie in [0, 1], got {w_lambda}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return 1.0 - w_lambda * _geometric(p_tau, int(n))


def _unit(x: float, what: str) -> float:
    if -ROUNDOFF <= x < 0:
        return 0.0
    if 1 < x <= 1 + ROUNDOFF:
        return 1.0
    if not 0 <= x <= 1:
        raise DomainError(f"{what} = {x} is not a probability")
    return x


def zeno_scan(
    sd: SpectralDensity,
    window: DetectorWindow,
    t_total: float,
    taus,
    spec: QuadratureSpec | None = None,
) -> ZenoScan:
    """No-click probability at ``t_total`` for each measurement period in ``taus``.

    ``n = round(t_total / tau)``; the mismatch ``n tau - t_total`` is kept on
    each row.
    """
    rows = []
    for tau in taus:
        tau = float(tau)
        n = max(1, int(round(t_total / tau)))
        p = _unit(survival_probability(sd, tau, spec), "p(tau)")
        w = _unit(click_probability(sd, window, tau, spec), "w_lambda(tau)")
        rows.append(ZenoRow(tau, n, p, w, no_click_probability(p, w, n), n * tau - t_total))
    by_tau = sorted(rows, key=lambda r: -r.tau)
    steps = [b.p_noclick - a.p_noclick for a, b in zip(by_tau[:-1], by_tau[1:])]
    return ZenoScan(rows, float(t_total), steps)
