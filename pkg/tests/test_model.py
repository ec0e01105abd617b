import numpy as np
import pytest
from hypothesis import given, strategies as st

from leedecay.errors import EmptyChannels, InvertedWindow, NegativeCoupling
from leedecay.model import Channel, EnergyGrid, LeeModel, form_factor, make_model, validate_model


def test_fig1_model_is_valid():
    model = make_model(3.0, [(0.36, 0.0, 5.0)])
    assert validate_model(model) is model
    assert model.total_width == pytest.approx(0.36)
    assert model.channels[0].coupling == pytest.approx(np.sqrt(0.36 / (2 * np.pi)))


def test_inverted_window():
    with pytest.raises(InvertedWindow):
        validate_model(make_model(3.0, [(0.36, 5.0, 0.0)]))


def test_decoupled_model_is_valid():
    model = validate_model(make_model(3.0, [(0.0, 0.0, 5.0)]))
    assert not model.coupled
    assert model.support() == []


@pytest.mark.parametrize(
    "channels, exc",
    [([], EmptyChannels), ([(-0.1, 0.0, 5.0)], NegativeCoupling), ([(0.1, 2.0, 2.0)], InvertedWindow)],
)
def test_invalid_models(channels, exc):
    with pytest.raises(exc):
        validate_model(LeeModel(3.0, tuple(Channel(*c) for c in channels)))


@pytest.mark.parametrize("k, expected", [(2.0, 1.0), (6.0, 0.0), (0.0, 1.0), (5.0, 1.0), (-1e-9, 0.0)])
def test_form_factor_closed_window(k, expected):
    assert form_factor(Channel(0.36, 0.0, 5.0), k) == expected


def test_support_merges_overlapping_windows():
    model = make_model(3.0, [(0.36, 0.0, 5.0), (0.16, 0.5, 4.0), (0.1, 7.0, 8.0), (0.0, 10.0, 11.0)])
    assert model.support() == [(0.0, 5.0), (7.0, 8.0)]


def test_grid_points_avoid_edges():
    pts = EnergyGrid(0.0, 5.0, 11).points(avoid=(0.0, 5.0))
    assert pts.size == 11
    assert 0.0 not in pts and 5.0 not in pts
    assert np.all(np.diff(pts) > 0)


@given(st.floats(-100, 100), st.floats(0, 10), st.floats(-10, 10), st.floats(0.01, 10))
def test_form_factor_is_an_indicator(k, g2, e_th, width):
    ch = Channel(g2, e_th, e_th + width)
    f = form_factor(ch, k)
    assert f in (0.0, 1.0)
    assert f == (1.0 if e_th <= k <= e_th + width else 0.0)
