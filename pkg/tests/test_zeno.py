import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from leedecay.errors import DomainError
from leedecay.evolution import survival_probability
from leedecay.zeno import DetectorWindow, MeasurementProtocol, click_probability, no_click_probability, zeno_scan

DYADIC = [2.0, 1.0, 0.5, 0.25, 0.125]


def test_window_bounds():
    assert DetectorWindow(0.5).bounds(3.0) == (2.5, 3.5)
    assert DetectorWindow(0.5, center=2.0).bounds(3.0) == (1.5, 2.5)
    with pytest.raises(ValueError):
        DetectorWindow(0.0)
    with pytest.raises(ValueError):
        MeasurementProtocol(0.5, 0)


def test_click_probability_full_window(fig1_sd):
    for tau in (0.3, 1.0, 4.0):
        w = click_probability(fig1_sd, DetectorWindow(10.0), tau)
        assert w == pytest.approx(1 - survival_probability(fig1_sd, tau), abs=1e-4)


def test_click_probability_zero_time(fig1_sd):
    assert click_probability(fig1_sd, DetectorWindow(0.5), 0.0) == 0.0


def test_click_probability_bounded_by_decay(fig2_sd):
    for tau in (0.2, 1.0, 3.0, 8.0):
        w = click_probability(fig2_sd, DetectorWindow(0.5), tau)
        assert 0 <= w <= 1 - survival_probability(fig2_sd, tau) + 1e-6


def test_click_probability_quadratic_onset(fig1_sd):
    ratios = [click_probability(fig1_sd, DetectorWindow(0.5), tau) / tau**2 for tau in (0.02, 0.01, 0.005)]
    assert (max(ratios) - min(ratios)) / min(ratios) < 0.05


def test_single_measurement():
    assert no_click_probability(0.7, 0.2, 1) == pytest.approx(0.8)
    assert no_click_probability(0.3, 0.0, 17) == 1.0


def test_domain_errors():
    with pytest.raises(DomainError):
        no_click_probability(1.2, 0.1, 3)
    with pytest.raises(DomainError):
        no_click_probability(0.9, -0.1, 3)
    with pytest.raises(DomainError):
        no_click_probability(0.9, 0.1, 0)


@pytest.mark.parametrize("p", [1 - 2.0**-40, 0.75, 0.5, 2.0**-60])
def test_geometric_sum_against_exact_rationals(p):
    from fractions import Fraction

    n, w = 1000, Fraction(1, 10**4)
    fp = Fraction(p)
    exact = 1 - w * sum(fp**j for j in range(n))
    assert no_click_probability(p, float(w), n) == pytest.approx(float(exact), rel=1e-14)
    assert no_click_probability(1.0, 1e-3, 10) == pytest.approx(0.99)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.integers(1, 200))
def test_no_click_bounds_and_monotone(p, w1, w2, n):
    # the detector can only see what has decayed
    w1, w2 = sorted((w1 * (1 - p), w2 * (1 - p)))
    a, b = no_click_probability(p, w1, n), no_click_probability(p, w2, n)
    assert -1e-12 <= b <= a <= 1 + 1e-12


def test_zeno_sequence(fig1_sd):
    scan = zeno_scan(fig1_sd, DetectorWindow(0.5), 4.0, DYADIC)
    assert [r.n for r in scan.rows] == [2, 4, 8, 16, 32]
    values = [r.p_noclick for r in scan.rows]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert scan.monotone
    assert values[-1] > values[0]


def test_single_row_scan(fig1_sd):
    scan = zeno_scan(fig1_sd, DetectorWindow(0.5), 4.0, [4.0])
    (row,) = scan.rows
    assert row.n == 1 and row.rounding == 0.0
    assert row.p_noclick == pytest.approx(1 - row.w_lambda, abs=1e-15)


def test_rounding_recorded(fig1_sd):
    (row,) = zeno_scan(fig1_sd, DetectorWindow(0.5), 4.0, [1.5]).rows
    assert row.n == 3 and row.rounding == pytest.approx(0.5)


def test_detector_induced_zeno_in_exponential_limit(wide_sd):
    scan = zeno_scan(wide_sd, DetectorWindow(0.5), 4.0, DYADIC + [0.0625])
    values = [r.p_noclick for r in scan.rows]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert values[-1] > 0.95


def test_full_window_matches_ideal_measurements(fig1_sd):
    tau, n = 0.5, 8
    (row,) = zeno_scan(fig1_sd, DetectorWindow(10.0), tau * n, [tau]).rows
    p = survival_probability(fig1_sd, tau)
    direct = 1 - (1 - p) * (1 - p**n) / (1 - p)
    assert row.p_noclick == pytest.approx(direct, abs=1e-4)
    assert direct == pytest.approx(p**n, rel=1e-12)
