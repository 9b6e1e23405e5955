import numpy as np
import pytest
from hypothesis import given, strategies as st

from ddident._dsp import (apply_spectral, delay_response, filter_same, fractional_delay, sequence_freqs,
                          taper, truncated_idtft)


def periodic_sinc(u, n):
    """Bandlimited interpolant of a delta on an even n-point circle (Nyquist bin split evenly)."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    near = np.isclose(np.mod(u + n / 2, n) - n / 2, 0, atol=1e-12)
    out[near] = 1.0
    v = u[~near]
    out[~near] = np.sin(np.pi * v) / (n * np.tan(np.pi * v / n))
    return out


@given(st.floats(-20, 20), st.sampled_from([16, 64, 256]))
def test_fractional_delay_matches_periodic_sinc(shift, n):
    x = np.zeros(n, complex)
    x[0] = 1
    y = fractional_delay(x, shift, 1.0)
    np.testing.assert_allclose(y, periodic_sinc(np.arange(n) - shift, n), atol=1e-11)


def test_integer_delay_is_roll():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    np.testing.assert_allclose(fractional_delay(x, 5 * 0.25, 0.25), np.roll(x, 5), atol=1e-12)


def test_zero_delay_is_copy():
    x = np.arange(4.0)
    y = fractional_delay(x, 0.0, 1.0)
    assert np.array_equal(y, x) and y is not x


def test_nyquist_bin_symmetric():
    w = 2 * np.pi * np.fft.fftfreq(8, 1.0)
    h = delay_response(w, 0.3, 8)
    assert h[4] == pytest.approx(np.cos(np.pi * 0.3))


def test_sequence_freqs_cover_one_period():
    w = sequence_freqs(10, 2.0)
    assert w[0] == 0 and w[-1] < np.pi and np.allclose(np.diff(w), np.pi / 10)


def test_taper_has_no_zero_taps():
    t = taper(9)
    assert t.min() > 0 and t[4] == pytest.approx(1.0) and np.allclose(t, t[::-1])


def test_truncated_idtft_of_constant_is_delta():
    h = truncated_idtft(lambda w: np.full(len(w), 2.0), 7, 1.0)
    np.testing.assert_allclose(h, [0, 0, 0, 2, 0, 0, 0], atol=1e-14)
    with pytest.raises(ValueError):
        truncated_idtft(lambda w: w, 6, 1.0)


def test_truncated_idtft_of_unit_delay_is_shifted_delta():
    h = truncated_idtft(lambda w: np.exp(-1j * w * 1.0), 9, 1.0)
    expect = np.zeros(9)
    expect[5] = taper(9)[5]
    np.testing.assert_allclose(h, expect, atol=1e-14)


def test_filter_same_centered():
    x = np.arange(6.0)
    np.testing.assert_allclose(filter_same(x, np.array([0, 1, 0]))[0], x)
    np.testing.assert_allclose(filter_same(x, np.array([1, 0, 0]))[0], [1, 2, 3, 4, 5, 0])


def test_apply_spectral_pad_zero_extends():
    x = np.ones((1, 4))
    y = apply_spectral(x, lambda w: np.ones(len(w)), 1.0, pad=3)
    assert y.shape == (1, 10)
    np.testing.assert_allclose(y[0], [0, 0, 0, 1, 1, 1, 1, 0, 0, 0], atol=1e-15)
