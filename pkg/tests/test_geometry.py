import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conicbounds.exceptions import DomainError, MeasureZeroError
from conicbounds.geometry import (angle, cap_volume, cap_volume_bounds, half_cap_fraction, omega,
                                  psi, psi_batch, sin_distance, unit_ball_volume)

HALF_PI = 0.5 * math.pi


def omega_oracle(N):
    return float(2 * mp.pi ** (mp.mpf(N + 1) / 2) / mp.gamma(mp.mpf(N + 1) / 2))


@pytest.mark.parametrize("N, expected", [(1, 2 * math.pi), (2, 4 * math.pi), (3, 2 * math.pi**2)])
def test_omega_small(N, expected):
    assert omega(N) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("N", [4, 17, 99, 101, 150, 300])
def test_omega_matches_high_precision(N):
    assert omega(N) == pytest.approx(omega_oracle(N), rel=1e-12)


@pytest.mark.parametrize("N, expected", [(1, math.pi), (2, 4 * math.pi / 3), (5, math.pi**3 / 6)])
def test_unit_ball_volume(N, expected):
    assert unit_ball_volume(N) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("bad", [0, -1])
def test_omega_rejects_small_N(bad):
    with pytest.raises(DomainError):
        omega(bad)
    with pytest.raises(DomainError):
        unit_ball_volume(bad)


@pytest.mark.parametrize("N", [1, 2, 6, 11, 40])
def test_cap_volume_endpoints(N):
    assert cap_volume(N, 0.0) == 0.0
    assert cap_volume(N, HALF_PI) == pytest.approx(omega(N) / 2, rel=1e-10)
    assert cap_volume(N, math.pi) == pytest.approx(omega(N), rel=1e-10)


@pytest.mark.parametrize("theta", [0.01, 0.4, 1.0, HALF_PI, 2.5, math.pi])
def test_cap_volume_two_sphere_closed_form(theta):
    assert cap_volume(2, theta) == pytest.approx(2 * math.pi * (1 - math.cos(theta)), rel=1e-12)


@pytest.mark.parametrize("N", [3, 6, 10])
@pytest.mark.parametrize("theta", [0.2, 0.9, 1.4])
def test_cap_volume_matches_mpmath(N, theta):
    exact = omega_oracle(N - 1) * float(mp.quad(lambda t: mp.sin(t) ** (N - 1), [0, theta]))
    assert cap_volume(N, theta) == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("theta", [-0.1, math.pi + 1e-9, math.nan])
def test_cap_volume_domain(theta):
    with pytest.raises(DomainError):
        cap_volume(4, theta)


def test_cap_volume_bounds_at_half_pi():
    lo, hi = cap_volume_bounds(6, HALF_PI)
    assert lo == pytest.approx(omega(6) / math.sqrt(14 * math.pi), rel=1e-14)
    assert hi == pytest.approx(omega(6) / 2, rel=1e-14)
    assert cap_volume_bounds(6, 0.0) == (0.0, 0.0)
    with pytest.raises(DomainError):
        cap_volume_bounds(6, HALF_PI + 1e-6)


@pytest.mark.parametrize("N", [1, 2, 5, 6, 13, 30, 50])
def test_cap_volume_bracketed(N):
    for theta in np.linspace(0.0, HALF_PI, 23):
        lo, hi = cap_volume_bounds(N, theta)
        v = cap_volume(N, theta)
        assert lo <= v * (1 + 1e-12) and v <= hi * (1 + 1e-12)


@given(N=st.integers(1, 50), a=st.floats(0, math.pi), b=st.floats(0, math.pi))
def test_cap_volume_monotone(N, a, b):
    lo, hi = sorted((a, b))
    assert cap_volume(N, lo) <= cap_volume(N, hi) * (1 + 1e-12)


@given(N=st.integers(6, 40), theta=st.floats(1e-3, HALF_PI))
def test_half_radius_cap_at_most_half_volume(N, theta):
    assert cap_volume(N, theta / 2) <= cap_volume(N, theta) / 2


@given(N=st.integers(1, 60), theta=st.floats(0, HALF_PI))
def test_half_cap_fraction_matches_quadrature(N, theta):
    assert half_cap_fraction(N, theta) == pytest.approx(
        cap_volume(N, theta) / (omega(N) / 2), rel=1e-9, abs=1e-300)


@pytest.mark.parametrize("x, y, expected", [
    ([1, 0], [1, 0], 0.0), ([1, 0], [0, 1], HALF_PI), ([1, 0], [-1, 0], math.pi),
    ([1, 0, 0], [3, 0, 0], 0.0)])
def test_angle(x, y, expected):
    assert angle(np.array(x, float), np.array(y, float)) == pytest.approx(expected, abs=1e-15)


def test_angle_near_collinear_is_finite():
    x = np.array([1.0, 1e-17])
    assert angle(x, x * (1 + 1e-16)) == 0.0


@pytest.mark.parametrize("x, y, expected", [
    ([1, 0], [0, 1], 1.0), ([1, 0], [-1, 0], 0.0),
    ([1, 0], [1 / math.sqrt(2), 1 / math.sqrt(2)], math.sqrt(0.5))])
def test_sin_distance(x, y, expected):
    assert sin_distance(np.array(x, float), np.array(y, float)) == pytest.approx(expected, abs=1e-15)


def test_zero_vector_rejected():
    with pytest.raises(DomainError):
        angle(np.zeros(3), np.ones(3))
    with pytest.raises(DomainError):
        sin_distance(np.ones(3), np.zeros(3))


@given(alpha=st.floats(0, HALF_PI))
def test_chord_angle_sandwich(alpha):
    x = np.array([math.cos(alpha), math.sin(alpha), 0.0])
    chord = np.linalg.norm(x - np.array([1.0, 0.0, 0.0]))
    assert 2 * math.sqrt(2) / math.pi * alpha <= chord + 1e-15
    assert chord <= alpha + 1e-15


@pytest.mark.parametrize("x, expected", [
    ([3, 0], [1, 0]), ([-3, 0], [1, 0]), ([1, 1], [1 / math.sqrt(2), 1 / math.sqrt(2)])])
def test_psi_examples(x, expected):
    out = psi(np.array([1.0, 0.0]), np.array(x, float))
    np.testing.assert_allclose(out, expected, atol=1e-15)


def test_psi_measure_zero():
    with pytest.raises(MeasureZeroError):
        psi(np.array([1.0, 0.0]), np.array([0.0, 2.0]))


@given(st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=4))
def test_psi_lands_in_open_half_sphere(coords):
    x = np.array(coords)
    center = np.array([0.5, 0.5, 0.5, 0.5])
    if abs(x @ center) < 1e-9 * max(1.0, np.linalg.norm(x)):
        return
    y = psi(center, x)
    assert y @ center > 0
    assert np.linalg.norm(y) == pytest.approx(1.0, abs=1e-14)


def test_psi_batch_flags_orthogonal_rows():
    center = np.array([1.0, 0.0, 0.0])
    X = np.array([[2.0, 1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    Y, ok = psi_batch(X, center)
    assert ok.tolist() == [True, True, False]
    assert np.all(Y[ok] @ center > 0)
    np.testing.assert_allclose(np.linalg.norm(Y[ok], axis=1), 1.0, atol=1e-15)
