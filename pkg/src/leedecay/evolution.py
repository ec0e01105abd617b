"""Time evolution of the unstable state and of its decay products.

With ``D(m)`` the full spectral measure (continuum ``d_S`` plus pole terms):

* survival amplitude   ``a(t) = int dD(m) exp(-i m t)``
* final amplitudes     ``b_i(k, t) = v_i f_i(k) X(k, t)`` with vertex
  ``v_i = sqrt(g2_i / 2 pi)`` and the channel-independent
  ``X(k, t) = int dD(m) (exp(-i m t) - exp(-i k t)) / (m - k)``
* decay flux           ``h_i(t) = 2 v_i Im[a(t) conj(int dk b_i(k, t))]``

The kernel of ``X`` is evaluated as ``-i t exp(-i (m + k) t / 2) sinc((m - k) t / 2)``
to remove the removable singularity at ``m = k``.  The k-integral needed by the
flux is done in closed form with the sine and cosine integrals, leaving a
single oscillatory m-integral per time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import sici

from ._parallel import chunked, pmap
from .errors import ChannelCountError, DivisionNearZero
from .model import Channel
from .quadrature import QuadratureSpec, integrate_adaptive, oscillatory_panels
from .spectral import SpectralDensity

TIME_CHUNK = 16
K_CHUNK = 64
RATIO_FLOOR = 1e-14


@dataclass(frozen=True)
class AmplitudeSeries:
    times: np.ndarray
    amps: np.ndarray
    probs: np.ndarray


@dataclass(frozen=True)
class FinalAmplitudeField:
    channel: int
    k: np.ndarray
    t: float
    values: np.ndarray


@dataclass(frozen=True)
class FluxSeries:
    """Per-channel decay fluxes ``h[i, j] = h_i(times[j])``.

    ``ratio`` is ``h_1 / h_2`` for two-channel models (NaN where ``flagged``,
    i.e. where ``|h_2|`` is too small to divide by) and None otherwise.
    """

    times: np.ndarray
    h: np.ndarray
    ratio: np.ndarray | None
    flagged: np.ndarray | None
    ratio_exp: float | None


# -- shared machinery --------------------------------------------------------


def _spec(sd: SpectralDensity, spec: QuadratureSpec | None) -> QuadratureSpec:
    return spec if spec is not None else sd.spec


def _over_support(
    sd: SpectralDensity,
    integrand: Callable[[np.ndarray], np.ndarray],
    phase: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec,
    extra_points: Sequence[float] = (),
):
    """Integrate ``integrand`` over the continuum, panelled by ``phase``."""
    points = sorted(set(sd.breakpoints()) | set(extra_points))
    total = 0
    for lo, hi in sd.support:
        edges = oscillatory_panels(
            phase, lo, hi, spec.panel_phase_budget, points, spec.max_panels
        )
        total = total + integrate_adaptive(integrand, lo, hi, spec, panels=edges).value
    return total


def _as_times(t):
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def _transform(
    sd: SpectralDensity,
    times: np.ndarray,
    energy: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec,
    extra_points: Sequence[float] = (),
) -> np.ndarray:
    """``int dD(m) exp(-i energy(m) t)`` for every t, in fixed-size chunks."""
    flat = times.ravel()

    def one_chunk(sl):
        tc = flat[sl]
        rate = float(np.max(np.abs(tc)))
        out = np.zeros(tc.size, dtype=complex)
        for p in sd.poles:
            out += p.weight * np.exp(-1j * float(energy(np.array(p.position))) * tc)
        if sd.support:
            def integrand(m):
                return sd.density(m)[:, None] * np.exp(-1j * energy(m)[:, None] * tc[None, :])

            out += _over_support(
                sd, integrand, lambda m: energy(m) * rate, spec, extra_points
            )
        return out

    parts = pmap(one_chunk, chunked(flat.size, TIME_CHUNK))
    return np.concatenate(parts).reshape(times.shape) if parts else np.zeros(times.shape, complex)


def _identity(m):
    return m


def _kernel(m, k, t):
    # (exp(-imt) - exp(-ikt)) / (m - k) without the removable singularity
    return -1j * t * np.exp(-0.5j * (m + k) * t) * np.sinc((m - k) * t / (2 * math.pi))


def _reduced_amplitude(sd: SpectralDensity, k: np.ndarray, t: float, spec: QuadratureSpec):
    """``X(k, t)`` for an array of final-state energies ``k``."""
    k = np.asarray(k, dtype=float)
    flat = k.ravel()
    if t == 0 or flat.size == 0:
        return np.zeros(k.shape, dtype=complex)

    def one_chunk(sl):
        kc = flat[sl]
        out = np.zeros(kc.size, dtype=complex)
        for p in sd.poles:
            out += p.weight * _kernel(p.position, kc, t)
        if sd.support:
            def integrand(m):
                return sd.density(m)[:, None] * _kernel(m[:, None], kc[None, :], t)

            out += _over_support(sd, integrand, lambda m: m * abs(t), spec)
        return out

    return np.concatenate(pmap(one_chunk, chunked(flat.size, K_CHUNK))).reshape(k.shape)


def _coupling_profile(sd: SpectralDensity, k, channels: Sequence[int] | None = None):
    """``sum_i v_i^2 f_i(k)`` over the selected channels."""
    k = np.asarray(k, dtype=float)
    idx = range(len(sd.model.channels)) if channels is None else channels
    out = np.zeros_like(k)
    for i in idx:
        ch = sd.model.channels[i]
        out = out + ch.g2 / (2 * math.pi) * ((k >= ch.e_th) & (k <= ch.lambda_cut))
    return out


# -- survival ----------------------------------------------------------------


def survival_amplitude(sd: SpectralDensity, t, spec: QuadratureSpec | None = None):
    """Survival amplitude ``a(t)`` for a scalar or array of times.

    Raises
    ------
    NonConvergence
        The oscillatory quadrature missed its tolerance.
    """
    times, scalar = _as_times(t)
    a = _transform(sd, times, _identity, _spec(sd, spec))
    return complex(a) if scalar else a


def survival_probability(sd: SpectralDensity, t, spec: QuadratureSpec | None = None):
    """``p(t) = |a(t)|^2``, unclipped."""
    a = survival_amplitude(sd, t, spec)
    return float(abs(a) ** 2) if np.ndim(a) == 0 else np.abs(a) ** 2


def amplitude_series(sd: SpectralDensity, times, spec: QuadratureSpec | None = None) -> AmplitudeSeries:
    times = np.asarray(times, dtype=float)
    amps = survival_amplitude(sd, times, spec)
    return AmplitudeSeries(times, amps, np.abs(amps) ** 2)


# -- decay products ----------------------------------------------------------


def final_amplitude(sd: SpectralDensity, channel: int, k, t: float, spec: QuadratureSpec | None = None):
    """Amplitude ``b_i(k, t)`` of the final state ``|k>`` in channel ``channel``.

    Zero outside the channel window and at ``t = 0``.
    """
    ch: Channel = sd.model.channels[channel]
    k_arr = np.asarray(k, dtype=float)
    inside = (k_arr >= ch.e_th) & (k_arr <= ch.lambda_cut)
    out = np.zeros(k_arr.shape, dtype=complex)
    if ch.g2 > 0 and np.any(inside):
        out[inside] = ch.coupling * _reduced_amplitude(sd, k_arr[inside], float(t), _spec(sd, spec))
    return complex(out) if out.ndim == 0 else out


def final_field(sd: SpectralDensity, channel: int, k, t: float, spec: QuadratureSpec | None = None) -> FinalAmplitudeField:
    k = np.asarray(k, dtype=float)
    return FinalAmplitudeField(channel, k, float(t), final_amplitude(sd, channel, k, t, spec))


def final_spectrum(sd: SpectralDensity, t: float, omega, spec: QuadratureSpec | None = None):
    """Final-state energy distribution ``eta(t, omega)`` and ``eta / eta(t, m0)``.

    ``eta`` sums ``|b_i(omega, t)|^2`` over channels, so it integrates to
    ``1 - p(t)``.  The normalized curve is NaN when ``eta(t, m0) = 0``.
    """
    spec = _spec(sd, spec)
    omega = np.asarray(omega, dtype=float)
    nodes = np.append(omega.ravel(), sd.model.m0)
    eta_all = _coupling_profile(sd, nodes) * np.abs(_reduced_amplitude(sd, nodes, float(t), spec)) ** 2
    eta, ref = eta_all[:-1].reshape(omega.shape), eta_all[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        norm = eta / ref if ref > 0 else np.full(omega.shape, np.nan)
    return eta, norm


def final_probability(
    sd: SpectralDensity,
    t: float,
    window: tuple[float, float] | None = None,
    channels: Sequence[int] | None = None,
    spec: QuadratureSpec | None = None,
) -> float:
    """``sum_i int |b_i(k, t)|^2 dk`` over ``window`` (default: everywhere).

    ``channels`` restricts the sum; by default all channels contribute.
    """
    spec = _spec(sd, spec)
    t = float(t)
    if t == 0:
        return 0.0
    idx = list(range(len(sd.model.channels))) if channels is None else list(channels)
    spans = [
        (sd.model.channels[i].e_th, sd.model.channels[i].lambda_cut)
        for i in idx
        if sd.model.channels[i].g2 > 0
    ]
    if not spans:
        return 0.0
    lo_all, hi_all = min(s[0] for s in spans), max(s[1] for s in spans)
    if window is not None:
        lo_all, hi_all = max(lo_all, window[0]), min(hi_all, window[1])
    if not lo_all < hi_all:
        return 0.0
    points = [e for s in spans for e in s] + list(sd.peaks) + [sd.model.m0]
    if window is not None:
        points += list(window)

    def integrand(k):
        return _coupling_profile(sd, k, idx) * np.abs(_reduced_amplitude(sd, k, t, spec)) ** 2

    edges = oscillatory_panels(
        lambda k: k * abs(t), lo_all, hi_all, spec.panel_phase_budget, points, spec.max_panels
    )
    return float(integrate_adaptive(integrand, lo_all, hi_all, spec, panels=edges).value)


def channel_probability(sd: SpectralDensity, channel: int, t: float, spec: QuadratureSpec | None = None) -> float:
    """``P_i(t) = int |b_i(k, t)|^2 dk``, the probability of having decayed into channel i."""
    return final_probability(sd, t, channels=[channel], spec=spec)


# -- fluxes ------------------------------------------------------------------


def _cin(x):
    """``Cin(x) = int_0^x (1 - cos s) / s ds``, accurate also near zero."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax < 1.0
    xs = ax[small] ** 2
    term = xs / 2.0  # x^2 / 2!
    acc = term / 2.0
    for n in range(2, 14):
        term = -term * xs / ((2 * n - 1) * (2 * n))
        acc = acc + term / (2 * n)
    out[small] = acc
    _, ci = sici(ax[~small])
    out[~small] = np.euler_gamma + np.log(ax[~small]) - ci
    return out


def _phi(x):
    """``int_0^x (1 - exp(i s)) / s ds = Cin(x) - i Si(x)``."""
    si, _ = sici(np.asarray(x, dtype=float))
    return _cin(x) - 1j * si


def window_kernel(m, t, ch: Channel):
    """``int_{e_th}^{lambda_cut} (exp(-i m t) - exp(-i k t)) / (m - k) dk`` in closed form."""
    m = np.asarray(m, dtype=float)
    return np.exp(-1j * m * t) * (_phi((m - ch.e_th) * t) - _phi((m - ch.lambda_cut) * t))


def _flux_chunk(sd: SpectralDensity, tc: np.ndarray, spec: QuadratureSpec) -> np.ndarray:
    """Fluxes for a chunk of times, shape ``(n_channels, len(tc))``."""
    chans = sd.model.channels
    n_c = len(chans)
    acc = np.zeros((tc.size, 1 + n_c), dtype=complex)
    for p in sd.poles:
        acc[:, 0] += p.weight * np.exp(-1j * p.position * tc)
        for i, ch in enumerate(chans):
            acc[:, 1 + i] += p.weight * window_kernel(p.position, tc, ch)
    if sd.support:
        rate = float(np.max(np.abs(tc)))

        def integrand(m):
            d = sd.density(m)[:, None]
            cols = [np.exp(-1j * m[:, None] * tc[None, :])]
            cols += [window_kernel(m[:, None], tc[None, :], ch) for ch in chans]
            return d[..., None] * np.stack(cols, axis=-1)

        acc += _over_support(sd, integrand, lambda m: m * rate, spec)
    a = acc[:, 0]
    g2 = np.array([ch.g2 for ch in chans])
    return (g2[:, None] / math.pi) * np.imag(a[None, :] * np.conj(acc[:, 1:].T))


def decay_flux(sd: SpectralDensity, channel: int, t, spec: QuadratureSpec | None = None):
    """``h_i(t)``: probability per unit time of decaying into channel ``channel``."""
    times, scalar = _as_times(t)
    h = _fluxes(sd, times.ravel(), _spec(sd, spec))[channel].reshape(times.shape)
    return float(h) if scalar else h


def _fluxes(sd: SpectralDensity, times: np.ndarray, spec: QuadratureSpec) -> np.ndarray:
    if times.size == 0:
        return np.zeros((len(sd.model.channels), 0))
    parts = pmap(lambda sl: _flux_chunk(sd, times[sl], spec), chunked(times.size, TIME_CHUNK))
    return np.concatenate(parts, axis=1)


def flux_series(sd: SpectralDensity, times, spec: QuadratureSpec | None = None) -> FluxSeries:
    """Fluxes of every channel on ``times``; for two channels also ``R = h_1 / h_2``."""
    times = np.asarray(times, dtype=float)
    h = _fluxes(sd, times, _spec(sd, spec))
    ratio = flagged = ratio_exp = None
    if len(sd.model.channels) == 2:
        flagged = np.abs(h[1]) < RATIO_FLOOR
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(flagged, np.nan, h[0] / np.where(flagged, 1.0, h[1]))
        g2b = sd.model.channels[1].g2
        ratio_exp = sd.model.channels[0].g2 / g2b if g2b > 0 else None
    return FluxSeries(times, h, ratio, flagged, ratio_exp)


def channel_ratio(sd: SpectralDensity, t: float, spec: QuadratureSpec | None = None) -> float:
    """``R(t) = h_1(t) / h_2(t)`` for a two-channel model.

    Raises
    ------
    ChannelCountError
        The model does not have exactly two channels.
    DivisionNearZero
        ``|h_2(t)|`` is below 1e-14.
    """
    if len(sd.model.channels) != 2:
        raise ChannelCountError(f"R(t) needs exactly 2 channels, model has {len(sd.model.channels)}")
    h = _fluxes(sd, np.array([float(t)]), _spec(sd, spec))[:, 0]
    if abs(h[1]) < RATIO_FLOOR:
        raise DivisionNearZero(f"h_2({t}) = {h[1]:.3e} is too small for a ratio")
    return float(h[0] / h[1])


def fwhm(omega: np.ndarray, eta: np.ndarray) -> float:
    """Full width at half maximum of a sampled single-peaked curve.

    Crossings are linearly interpolated; a side that never drops below half
    maximum is cut at the end of the sampled range.
    """
    omega = np.asarray(omega, dtype=float)
    eta = np.asarray(eta, dtype=float)
    i = int(np.argmax(eta))
    half = 0.5 * eta[i]

    def crossing(step):
        j = i
        while 0 <= j + step < eta.size and eta[j + step] >= half:
            j += step
        if not 0 <= j + step < eta.size:
            return omega[j]
        x0, x1, y0, y1 = omega[j], omega[j + step], eta[j], eta[j + step]
        return x0 + (half - y0) * (x1 - x0) / (y1 - y0)

    return float(crossing(+1) - crossing(-1))
