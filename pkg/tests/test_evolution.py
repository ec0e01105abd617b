import math

import numpy as np
import pytest

from leedecay.errors import ChannelCountError, DivisionNearZero
from leedecay.evolution import (
    amplitude_series,
    channel_probability,
    channel_ratio,
    decay_flux,
    final_amplitude,
    final_probability,
    final_spectrum,
    flux_series,
    fwhm,
    survival_amplitude,
    survival_probability,
)
from leedecay.model import make_model
from leedecay.quadrature import QuadratureSpec
from leedecay.spectral import spectral_density, zeno_time

UNITARITY_TIMES = [0.5, 1.0, 2.0, 5.0, 10.0]


@pytest.fixture(scope="module")
def identical_sd():
    return spectral_density(make_model(3.0, [(0.2, 0.0, 5.0), (0.2, 0.0, 5.0)]))


@pytest.fixture(scope="module")
def wide2_sd():
    return spectral_density(make_model(3.0, [(0.36, -47.0, 53.0), (0.16, -47.0, 53.0)]))


def test_initial_values(fig1_sd):
    assert abs(survival_amplitude(fig1_sd, 0.0) - 1) < 1e-8
    assert abs(survival_probability(fig1_sd, 0.0) - 1) < 1e-8


def test_short_time_survival(fig1_sd):
    p = survival_probability(fig1_sd, 0.1)
    assert p == pytest.approx(0.9971, abs=5e-4)
    assert p == pytest.approx(1 - (0.1 / zeno_time(fig1_sd.model)) ** 2, abs=1e-5)


def test_short_time_zeno_limit(fig1_sd):
    ts = [1e-2, 5e-3, 2.5e-3]
    target = zeno_time(fig1_sd.model) ** -2
    q = [(1 - survival_probability(fig1_sd, t)) / t**2 for t in ts]
    for v in q:
        assert v == pytest.approx(target, rel=0.01)
    tight = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-16)
    sd = spectral_density(fig1_sd.model, spec=tight)
    q = [(1 - survival_probability(sd, t)) / t**2 for t in ts]
    assert (4 * q[2] - q[1]) / 3 == pytest.approx(target, rel=1e-5)


def test_probabilities_bounded(fig1_sd, fig2_sd):
    t = np.linspace(0, 40, 161)
    for sd in (fig1_sd, fig2_sd):
        p = survival_probability(sd, t)
        assert np.all(p >= 0) and np.all(p <= 1 + 1e-6)


def test_time_reversal(fig1_sd):
    t = np.random.default_rng(7).uniform(0.1, 30.0, 10)
    a_pos, a_neg = survival_amplitude(fig1_sd, t), survival_amplitude(fig1_sd, -t)
    np.testing.assert_allclose(np.abs(a_neg), np.abs(a_pos), rtol=0, atol=1e-12)
    np.testing.assert_allclose(a_neg, np.conj(a_pos), rtol=0, atol=1e-12)


def test_batch_matches_single_points(fig1_sd):
    t = np.linspace(0, 40, 37)
    batch = amplitude_series(fig1_sd, t).amps
    single = np.array([survival_amplitude(fig1_sd, x) for x in t])
    assert np.max(np.abs(batch - single)) < 1e-8


def test_worker_count_does_not_change_results(fig2_sd, monkeypatch):
    t = np.linspace(0, 20, 50)
    monkeypatch.setenv("LEEDECAY_WORKERS", "1")
    serial_a, serial_h = survival_amplitude(fig2_sd, t), flux_series(fig2_sd, t).h
    monkeypatch.setenv("LEEDECAY_WORKERS", "4")
    np.testing.assert_array_equal(survival_amplitude(fig2_sd, t), serial_a)
    np.testing.assert_array_equal(flux_series(fig2_sd, t).h, serial_h)


def test_exponential_limit(wide_sd):
    t = np.linspace(0, 10, 101)
    assert np.max(np.abs(survival_probability(wide_sd, t) - np.exp(-0.36 * t))) < 0.02


def test_long_time_power_law(fig1_sd):
    t = np.geomspace(80, 200, 25)
    slope = np.polyfit(np.log(t), np.log(survival_probability(fig1_sd, t)), 1)[0]
    assert -2.6 <= slope <= -1.4


@pytest.mark.parametrize("t", UNITARITY_TIMES)
def test_unitarity(fig1_sd, fig2_sd, t):
    for sd in (fig1_sd, fig2_sd):
        total = survival_probability(sd, t) + final_probability(sd, t)
        assert abs(total - 1) < 1e-4
        assert abs(total - 1) < 1e-7  # regression margin


def test_final_amplitude_zero_time_and_outside(fig2_sd):
    k = np.array([0.1, 0.4, 2.0, 4.2, 6.0])
    np.testing.assert_array_equal(final_amplitude(fig2_sd, 0, k, 0.0), 0)
    b2 = final_amplitude(fig2_sd, 1, k, 3.0)
    assert b2[0] == 0 and b2[1] == 0 and b2[3] == 0 and b2[4] == 0
    assert b2[2] != 0


def test_first_order_perturbation(fig1_sd):
    t = 1e-3
    b = final_amplitude(fig1_sd, 0, 3.0, t)
    expected = -1j * t * math.sqrt(0.36) / math.sqrt(2 * math.pi)
    # the phase differs at relative order k t from the free evolution
    assert abs(b - expected) < 1e-2 * abs(expected)
    assert abs(b) == pytest.approx(abs(expected), rel=1e-4)


@pytest.mark.parametrize("k, t", [(2.5, 3.0), (0.7, 6.0), (4.9, 1.5)])
def test_final_amplitude_matches_equation_of_motion(fig1_sd, k, t):
    # b(k, t) = -i v int_0^t exp(-i k (t - s)) a(s) ds, integrated by Gauss-Legendre
    x, w = np.polynomial.legendre.leggauss(120)
    s = 0.5 * t * (x + 1)
    a = survival_amplitude(fig1_sd, s)
    v = math.sqrt(0.36 / (2 * math.pi))
    oracle = -1j * v * 0.5 * t * np.sum(w * np.exp(-1j * k * (t - s)) * a)
    assert abs(final_amplitude(fig1_sd, 0, k, t) - oracle) < 1e-9


def test_flux_vanishes_at_zero(fig2_sd):
    assert decay_flux(fig2_sd, 0, 0.0) == 0.0
    assert decay_flux(fig2_sd, 1, 0.0) == 0.0


@pytest.mark.parametrize("t", [0.5, 1.0, 3.0, 7.0, 15.0])
def test_flux_is_derivative_of_channel_probability(fig2_sd, t):
    h = 1e-3
    for i in (0, 1):
        fd = (channel_probability(fig2_sd, i, t + h) - channel_probability(fig2_sd, i, t - h)) / (2 * h)
        assert abs(decay_flux(fig2_sd, i, t) - fd) < 1e-4


@pytest.mark.parametrize("t", [0.5, 2.0, 9.0])
def test_total_flux_is_survival_loss_rate(fig1_sd, fig2_sd, t):
    h = 1e-3
    for sd in (fig1_sd, fig2_sd):
        dp = (survival_probability(sd, t + h) - survival_probability(sd, t - h)) / (2 * h)
        total = sum(decay_flux(sd, i, t) for i in range(len(sd.model.channels)))
        assert abs(total + dp) < 1e-4


def test_exponential_limit_flux(wide_sd):
    t = np.linspace(2, 10, 9)
    h = decay_flux(wide_sd, 0, t)
    np.testing.assert_allclose(h, 0.36 * np.exp(-0.36 * t), atol=1e-3)


def test_ratio_identical_channels(identical_sd):
    fs = flux_series(identical_sd, np.linspace(0.25, 20, 40))
    np.testing.assert_allclose(fs.ratio, 1.0, atol=1e-6)
    assert fs.ratio_exp == 1.0


def test_ratio_fig2_fluctuates(fig2_sd):
    fs = flux_series(fig2_sd, np.linspace(0, 40, 401))
    assert fs.ratio_exp == pytest.approx(2.25)
    dev = np.abs(fs.ratio[~fs.flagged] - 2.25) / 2.25
    assert np.max(dev) > 0.10


def test_ratio_wide_window(wide2_sd):
    t = np.linspace(1, 10, 19)
    r = np.array([channel_ratio(wide2_sd, x) for x in t])
    np.testing.assert_allclose(r, 2.25, rtol=0.02)


def test_ratio_errors(fig1_sd, fig2_sd):
    with pytest.raises(ChannelCountError):
        channel_ratio(fig1_sd, 1.0)
    with pytest.raises(DivisionNearZero):
        channel_ratio(fig2_sd, 0.0)
    fs = flux_series(fig2_sd, [0.0, 1.0])
    assert fs.flagged[0] and math.isnan(fs.ratio[0]) and not fs.flagged[1]


@pytest.fixture(scope="module")
def spectra(fig1_sd):
    omega = np.linspace(0, 5, 2001)[1:-1]
    return omega, {t: final_spectrum(fig1_sd, t, omega) for t in (1.0, 2.0, 10.0)}


def test_spectrum_nonnegative_and_normalized(spectra):
    omega, out = spectra
    i0 = np.argmin(np.abs(omega - 3.0))
    for eta, norm in out.values():
        assert np.all(eta >= 0)
        assert norm[i0] == pytest.approx(eta[i0] / eta.max() * norm.max(), rel=1e-12)


def test_spectrum_integrates_to_decay_probability(fig1_sd, spectra):
    omega, out = spectra
    for t, (eta, _) in out.items():
        full = np.concatenate([[0.0], omega, [5.0]])
        vals = final_spectrum(fig1_sd, t, np.array([1e-12, 5 - 1e-12]))[0]
        area = np.trapezoid(np.concatenate([[vals[0]], eta, [vals[1]]]), full)
        assert area == pytest.approx(1 - survival_probability(fig1_sd, t), abs=1e-4)


def test_spectrum_broadening(spectra):
    omega, out = spectra
    widths = [fwhm(omega, out[t][1]) for t in (1.0, 2.0, 10.0)]
    assert widths[0] > widths[1] > widths[2]


def test_fwhm_of_a_lorentzian():
    x = np.linspace(-10, 10, 20001)
    assert fwhm(x, 1 / (1 + x**2)) == pytest.approx(2.0, abs=1e-6)


@pytest.mark.parametrize("x", [1e-6, 0.3, 0.999, 1.0, 2.5, 40.0, -3.0])
def test_cin_against_quadrature(x):
    from scipy import integrate

    from leedecay.evolution import _cin

    ref = integrate.quad(lambda s: 2 * math.sin(s / 2) ** 2 / s if s else 0.0, 0, abs(x), epsabs=1e-15, epsrel=1e-13, limit=400)[0]
    assert float(_cin(x)) == pytest.approx(ref, rel=1e-12, abs=1e-22)


@pytest.mark.parametrize("m, t", [(2.0, 3.0), (-1.0, 0.7), (4.999, 12.0), (7.5, 2.0)])
def test_window_kernel_against_quadrature(m, t):
    from scipy import integrate

    from leedecay.evolution import window_kernel
    from leedecay.model import Channel

    def part(k, fn):
        d = m - k
        return fn((np.exp(-1j * m * t) - np.exp(-1j * k * t)) / d) if abs(d) > 1e-12 else fn(-1j * t * np.exp(-1j * m * t))

    ref = sum(
        1j ** j * integrate.quad(lambda k: part(k, fn), 0.0, 5.0, points=[m] if 0 < m < 5 else None, epsabs=1e-13, limit=400)[0]
        for j, fn in enumerate((np.real, np.imag))
    )
    assert abs(window_kernel(m, t, Channel(0.36, 0.0, 5.0)) - ref) < 1e-10
