"""Lee-Hamiltonian model data: bare mass, decay channels, box form factors.

Every channel couples the unstable state to a continuum of final states
with energy ``omega(k) = k`` through the vertex ``sqrt(g2) * f(k) / sqrt(2 pi)``
where ``f`` is the indicator of the closed window ``[e_th, lambda_cut]``.
Units are arbitrary energy units with hbar = 1; times are inverse energies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyChannels, InvertedWindow, NegativeCoupling


@dataclass(frozen=True)
class Channel:
    g2: float
    e_th: float
    lambda_cut: float

    @property
    def width(self) -> float:
        return self.lambda_cut - self.e_th

    @property
    def coupling(self) -> float:
        """Vertex height ``sqrt(g2 / 2 pi)`` inside the window."""
        return math.sqrt(self.g2 / (2.0 * math.pi))


@dataclass(frozen=True)
class LeeModel:
    m0: float
    channels: tuple[Channel, ...] = field(default_factory=tuple)

    def __post_init__(self):
        # accept any sequence but store a tuple so the model stays hashable
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def coupled(self) -> tuple[Channel, ...]:
        """Channels with non-zero coupling; only these shape the spectrum."""
        return tuple(ch for ch in self.channels if ch.g2 > 0)

    @property
    def total_width(self) -> float:
        """Exponential-limit width, the sum of the partial widths ``g2``."""
        return float(sum(ch.g2 for ch in self.channels))

    def edges(self) -> list[float]:
        """Sorted distinct window edges of the coupled channels."""
        return sorted({e for ch in self.coupled for e in (ch.e_th, ch.lambda_cut)})

    def support(self) -> list[tuple[float, float]]:
        """Union of the coupled channel windows as disjoint closed intervals."""
        spans = sorted((ch.e_th, ch.lambda_cut) for ch in self.coupled)
        merged: list[list[float]] = []
        for lo, hi in spans:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return [(lo, hi) for lo, hi in merged]


@dataclass(frozen=True)
class EnergyGrid:
    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"EnergyGrid needs lo < hi, got {self.lo}, {self.hi}")
        if self.n < 2:
            raise ValueError(f"EnergyGrid needs n >= 2, got {self.n}")

    def points(self, avoid: Sequence[float] = ()) -> np.ndarray:
        """Uniform samples, nudged off any energy listed in ``avoid``.

        Points coinciding with an avoided energy move by ``1e-12 * (hi - lo)``
        towards the interior of the grid.
        """
        m = np.linspace(self.lo, self.hi, self.n)
        nudge = 1e-12 * (self.hi - self.lo)
        for e in avoid:
            hit = m == e
            if np.any(hit):
                m[hit] = e - nudge if e >= self.hi else e + nudge
        return m


def make_model(m0: float, channels: Sequence[tuple[float, float, float] | Channel]) -> LeeModel:
    """Build and validate a model from ``(g2, e_th, lambda_cut)`` triples."""
    chans = [c if isinstance(c, Channel) else Channel(*map(float, c)) for c in channels]
    return validate_model(LeeModel(float(m0), tuple(chans)))


def validate_model(model: LeeModel) -> LeeModel:
    """Return ``model`` unchanged if it is physically admissible.

    Raises
    ------
    EmptyChannels
        The model has no decay channel.
    InvertedWindow
        A channel has ``e_th >= lambda_cut``.
    NegativeCoupling
        A channel has ``g2 < 0``.
    """
    if not model.channels:
        raise EmptyChannels("model needs at least one channel")
    if not math.isfinite(model.m0):
        raise ValueError(f"m0 must be finite, got {model.m0}")
    for i, ch in enumerate(model.channels):
        if not all(math.isfinite(v) for v in (ch.g2, ch.e_th, ch.lambda_cut)):
            raise ValueError(f"channel {i} has non-finite parameters")
        if ch.g2 < 0:
            raise NegativeCoupling(f"channel {i}: g2 = {ch.g2} < 0")
        if not ch.e_th < ch.lambda_cut:
            raise InvertedWindow(
                f"channel {i}: e_th = {ch.e_th} must be below lambda_cut = {ch.lambda_cut}"
            )
    return model


def form_factor(ch: Channel, k):
    """Box form factor: 1 on the closed window ``[e_th, lambda_cut]``, else 0."""
    k = np.asarray(k, dtype=float)
    out = ((k >= ch.e_th) & (k <= ch.lambda_cut)).astype(float)
    return out if out.ndim else float(out)
