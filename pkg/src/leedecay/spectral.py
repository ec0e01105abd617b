"""Self-energy, spectral density and bound-state poles of the box Lee model.

For the box form factor the self-energy on the upper edge of the real axis is

    Re S(m) = sum_i g2_i / (2 pi) * ln|(m - e_th_i) / (m - lambda_cut_i)|
    Im S(m) = -sum_i g2_i / 2 * f_i(m)

and the continuum part of the spectral density is the Breit-Wigner-like

    d_S(m) = (1/pi) * (-Im S) / ((m - m0 - Re S)^2 + (Im S)^2).

Outside the union of windows the propagator has real poles at the roots of
``m - m0 - Re S(m)``, one in every gap and one on each side, each carrying
weight ``1 / (1 - Re S'(m_p))``.  At weak coupling those roots sit
exponentially close to the window edges, so they are located in the
coordinate ``u = ln|m - edge|`` rather than in ``m`` itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BracketingFailure,
    EvaluationAtLogSingularity,
    NormalizationFailure,
)
from .model import EnergyGrid, LeeModel
from .quadrature import DEFAULT_SPEC, QuadratureSpec, find_root_bracketed, integrate_adaptive

NORM_TOL = 1e-6
SCAN_FACTOR = 50.0
EDGE_OFFSET = 1e-12
NEGLIGIBLE_WEIGHT = 1e-15


@dataclass(frozen=True)
class SelfEnergyValue:
    re: float
    im: float


@dataclass(frozen=True)
class Pole:
    position: float
    weight: float


def re_self_energy(model: LeeModel, m):
    """Vectorized real part; infinite exactly on a window edge."""
    m = np.asarray(m, dtype=float)
    out = np.zeros_like(m)
    with np.errstate(divide="ignore", invalid="ignore"):
        for ch in model.coupled:
            out = out + ch.g2 / (2 * math.pi) * (
                np.log(np.abs(m - ch.e_th)) - np.log(np.abs(m - ch.lambda_cut))
            )
    return out


def im_self_energy(model: LeeModel, m):
    m = np.asarray(m, dtype=float)
    out = np.zeros_like(m)
    for ch in model.coupled:
        out = out - 0.5 * ch.g2 * ((m >= ch.e_th) & (m <= ch.lambda_cut))
    return out


def re_self_energy_slope(model: LeeModel, m):
    """Closed-form derivative of the real part with respect to ``m``."""
    m = np.asarray(m, dtype=float)
    out = np.zeros_like(m)
    for ch in model.coupled:
        out = out + ch.g2 / (2 * math.pi) * (1 / (m - ch.e_th) - 1 / (m - ch.lambda_cut))
    return out


def self_energy(model: LeeModel, m: float) -> SelfEnergyValue:
    """Self-energy at real ``m`` on the upper edge of the cut.

    Raises
    ------
    EvaluationAtLogSingularity
        ``m`` coincides with an edge of a coupled channel.
    """
    m = float(m)
    if m in model.edges():
        raise EvaluationAtLogSingularity(f"Re S diverges at the window edge m = {m}")
    return SelfEnergyValue(float(re_self_energy(model, m)), float(im_self_energy(model, m)))


def continuum_density(model: LeeModel, m):
    """Continuum part of d_S at ``m`` (vectorized, zero outside the windows)."""
    m = np.asarray(m, dtype=float)
    im = im_self_energy(model, m)
    re = re_self_energy(model, m)
    with np.errstate(invalid="ignore", over="ignore"):
        d = (-im / math.pi) / ((m - model.m0 - re) ** 2 + im ** 2)
    return np.where((im < 0) & np.isfinite(re), d, 0.0)


# -- poles -------------------------------------------------------------------


def _re_self_energy_near(model: LeeModel, anchor: float, sign: int, u: float) -> float:
    """Re S at ``m = anchor + sign * exp(u)`` without forming ``m - anchor``."""
    du = math.exp(u)
    total = 0.0
    for ch in model.coupled:
        lo = u if ch.e_th == anchor else math.log(abs(anchor - ch.e_th + sign * du))
        hi = u if ch.lambda_cut == anchor else math.log(abs(anchor - ch.lambda_cut + sign * du))
        total += ch.g2 / (2 * math.pi) * (lo - hi)
    return total


def _pole_weight(model: LeeModel, anchor: float, sign: int, u: float) -> float:
    # w = du / (du * (1 - Re S')) with each du / (m - edge) formed exactly
    du = math.exp(u)

    def scaled_inverse(edge):
        return float(sign) if edge == anchor else du / (anchor - edge + sign * du)

    denom = du
    for ch in model.coupled:
        denom -= ch.g2 / (2 * math.pi) * (scaled_inverse(ch.e_th) - scaled_inverse(ch.lambda_cut))
    return du / denom


def _solve_near_edge(model: LeeModel, anchor: float, sign: int, u_max: float) -> Pole:
    def gap(u):
        return anchor + sign * math.exp(u) - model.m0 - _re_self_energy_near(model, anchor, sign, u)

    g_hi = gap(u_max)
    if g_hi == 0:
        u = u_max
    else:
        # the gap function diverges with the sign of -sign as u -> -inf
        if np.sign(g_hi) != sign:
            raise BracketingFailure(
                f"no sign change of m - m0 - Re S within distance {math.exp(u_max):.6g} "
                f"of the edge {anchor}"
            )
        u_lo = u_max - 40.0
        while np.sign(gap(u_lo)) == np.sign(g_hi):
            u_lo = u_max - 2 * (u_max - u_lo)
            if u_lo < -1e15:
                raise BracketingFailure(f"pole search near edge {anchor} ran away")
        u = find_root_bracketed(gap, u_lo, u_max, tol=1e-15, xtol=1e-14)
    return Pole(anchor + sign * math.exp(u), _pole_weight(model, anchor, sign, u))


def find_poles(model: LeeModel) -> list[Pole]:
    """Real poles of the propagator outside the union of channel windows.

    A model without coupled channels has the single pole ``(m0, 1)``.

    Raises
    ------
    BracketingFailure
        A pole outside the windows lies beyond the scan range.
    """
    support = model.support()
    if not support:
        return [Pole(model.m0, 1.0)]
    width = support[-1][1] - support[0][0]
    reach = SCAN_FACTOR * width

    poles = []
    lo_edge = support[0][0]
    poles.append(_solve_near_edge(model, lo_edge, -1, math.log(reach + max(0.0, lo_edge - model.m0))))
    for (_, left), (right, _) in zip(support[:-1], support[1:]):
        mid = 0.5 * (left + right)
        g_mid = mid - model.m0 - float(re_self_energy(model, mid))
        if g_mid == 0:
            poles.append(Pole(mid, float(1 / (1 - re_self_energy_slope(model, mid)))))
        elif g_mid > 0:
            poles.append(_solve_near_edge(model, left, +1, math.log(mid - left)))
        else:
            poles.append(_solve_near_edge(model, right, -1, math.log(right - mid)))
    hi_edge = support[-1][1]
    poles.append(_solve_near_edge(model, hi_edge, +1, math.log(reach + max(0.0, model.m0 - hi_edge))))
    return poles


def zeno_time(model: LeeModel) -> float:
    """Short-time scale of the survival probability, ``p(t) ~ 1 - (t/tau_Z)^2``.

    The inverse square is the energy variance of the initial state, which for
    box form factors is ``sum_i g2_i * (lambda_cut_i - e_th_i) / (2 pi)``.
    """
    var = sum(ch.g2 * ch.width for ch in model.channels) / (2 * math.pi)
    if var <= 0:
        raise ValueError("zeno_time needs at least one channel with g2 > 0")
    return 1.0 / math.sqrt(var)


def resonance_points(model: LeeModel, samples: int = 4001) -> list[float]:
    """Interior roots of ``m - m0 - Re S(m)``: the peaks of the continuum.

    Roots closer to an edge than ``EDGE_OFFSET`` times the window width are
    not resolved; their spectral weight is below double precision.
    """
    roots = []
    for lo, hi in model.support():
        off = EDGE_OFFSET * (hi - lo)
        m = np.linspace(lo + off, hi - off, samples)
        g = m - model.m0 - re_self_energy(model, m)
        flips = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]
        for i in flips:
            f = lambda x: x - model.m0 - float(re_self_energy(model, x))  # noqa: E731
            if g[i] == 0:
                roots.append(float(m[i]))
            elif g[i + 1] != 0:
                roots.append(find_root_bracketed(f, float(m[i]), float(m[i + 1])))
    return sorted(set(roots))


# -- spectral density --------------------------------------------------------


@dataclass(frozen=True)
class SpectralDensity:
    """Tabulated continuum density plus the discrete poles of one model.

    The samples in ``m``/``values`` are for export; evolution routines call
    ``density`` so quadrature nodes are never interpolated.
    """

    model: LeeModel
    grid: EnergyGrid | None
    m: np.ndarray
    values: np.ndarray
    poles: tuple[Pole, ...]
    continuum_norm: float
    peaks: tuple[float, ...] = ()
    spec: QuadratureSpec = field(default=DEFAULT_SPEC, repr=False)

    @property
    def norm_residual(self) -> float:
        return self.continuum_norm + sum(p.weight for p in self.poles) - 1.0

    @property
    def support(self) -> list[tuple[float, float]]:
        return self.model.support()

    @property
    def peak(self) -> float | None:
        """Position of the highest interior maximum of the continuum."""
        if not self.peaks:
            return None
        return max(self.peaks, key=lambda m: float(self.density(m)))

    def breakpoints(self) -> list[float]:
        """Edges and resonance peaks, the mandatory quadrature split points."""
        return sorted(set(self.model.edges()) | set(self.peaks))

    def density(self, m):
        return continuum_density(self.model, m)

    def moment(self, order: int, about: float = 0.0) -> float:
        """``integral (m - about)^order dD(m)`` over continuum and poles."""
        total = sum(p.weight * (p.position - about) ** order for p in self.poles)
        for lo, hi in self.support:
            total += integrate_adaptive(
                lambda m: (m - about) ** order * self.density(m),
                lo, hi, self.spec, points=self.breakpoints(),
            ).value
        return float(total)


def default_grid(model: LeeModel, n: int = 2001) -> EnergyGrid | None:
    support = model.support()
    if not support:
        return None
    return EnergyGrid(support[0][0], support[-1][1], n)


def spectral_density(
    model: LeeModel,
    grid: EnergyGrid | None = None,
    spec: QuadratureSpec = DEFAULT_SPEC,
    norm_tol: float = NORM_TOL,
) -> SpectralDensity:
    """Spectral density of ``model`` sampled on ``grid``, with its poles.

    Raises
    ------
    NormalizationFailure
        Continuum integral plus pole weights misses 1 by more than ``norm_tol``.
    """
    poles = tuple(find_poles(model))
    if not model.coupled:
        return SpectralDensity(
            model, None, np.empty(0), np.empty(0), poles, 0.0, (), spec
        )
    grid = grid or default_grid(model)
    m = grid.points(avoid=model.edges())
    peaks = tuple(resonance_points(model))
    splits = sorted(set(model.edges()) | set(peaks))
    norm = 0.0
    for lo, hi in model.support():
        norm += integrate_adaptive(
            lambda x: continuum_density(model, x), lo, hi, spec, points=splits
        ).value
    sd = SpectralDensity(
        model, grid, m, continuum_density(model, m), poles, float(norm), peaks, spec
    )
    if not abs(sd.norm_residual) <= norm_tol:
        raise NormalizationFailure(
            f"continuum {norm:.12g} + poles {sum(p.weight for p in poles):.3e} "
            f"misses 1 by {sd.norm_residual:.3e}"
        )
    return sd
