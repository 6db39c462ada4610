import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cflab.errors import DimensionError, NumericalConsistencyError
from cflab.spectral import cyclic_shift, fft2, gaussian_label, hann_window, ifft2, wrapped_offset
from oracles import direct_dft2, shift_loop

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def grids(max_side=12):
    return st.tuples(st.integers(1, max_side), st.integers(1, max_side)).flatmap(
        lambda s: arrays(np.float64, s, elements=finite)
    )


def test_fft_of_impulse_is_flat():
    g = np.zeros((4, 4))
    g[0, 0] = 1.0
    np.testing.assert_array_equal(fft2(g), np.ones((4, 4), dtype=complex))


@pytest.mark.parametrize("shape", [(3, 5), (4, 4), (1, 7)])
def test_fft_of_constant_is_dc_only(shape):
    c = 2.5
    s = fft2(np.full(shape, c))
    assert s[0, 0] == pytest.approx(c * shape[0] * shape[1])
    rest = s.copy()
    rest[0, 0] = 0
    assert np.max(np.abs(rest)) < 1e-12


def test_fft_matches_direct_dft(rng):
    g = rng.standard_normal((8, 8))
    assert np.max(np.abs(fft2(g) - direct_dft2(g))) < 1e-10


def test_fft_rejects_empty():
    with pytest.raises(DimensionError):
        fft2(np.zeros((0, 3)))


def test_ifft_of_flat_spectrum_is_impulse():
    g = ifft2(np.ones((4, 4), dtype=complex))
    expected = np.zeros((4, 4))
    expected[0, 0] = 1.0
    np.testing.assert_allclose(g, expected, atol=1e-15)


def test_round_trip(rng):
    g = rng.standard_normal((16, 16))
    assert np.max(np.abs(ifft2(fft2(g)) - g)) < 1e-10


def test_parseval(rng):
    g = rng.standard_normal((8, 8))
    lhs = np.sum(g**2)
    rhs = np.sum(np.abs(direct_dft2(g)) ** 2) / g.size
    assert abs(lhs - rhs) / lhs < 1e-10


def test_ifft_flags_non_hermitian_spectrum():
    s = np.zeros((4, 4), dtype=complex)
    s[0, 1] = 1j
    with pytest.raises(NumericalConsistencyError):
        ifft2(s)


@settings(max_examples=40, deadline=None)
@given(grids(64))
def test_round_trip_property(g):
    assert np.max(np.abs(ifft2(fft2(g)) - g)) < 1e-10 * max(1.0, np.max(np.abs(g)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10), finite, finite, st.data())
def test_linearity(h, w, a, b, data):
    g1 = data.draw(arrays(np.float64, (h, w), elements=st.floats(-1, 1)))
    g2 = data.draw(arrays(np.float64, (h, w), elements=st.floats(-1, 1)))
    lhs = fft2(a * g1 + b * g2)
    rhs = a * fft2(g1) + b * fft2(g2)
    scale = max(1.0, abs(a), abs(b))
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * scale * h * w


def test_shift_identities(rng):
    g = rng.standard_normal((5, 7))
    np.testing.assert_array_equal(cyclic_shift(g, 0, 0), g)
    np.testing.assert_array_equal(cyclic_shift(g, 5, 7), g)
    np.testing.assert_array_equal(cyclic_shift(g, 2, -3), shift_loop(g, 2, -3))


def test_shift_composition(rng):
    g = rng.standard_normal((5, 5))
    np.testing.assert_array_equal(cyclic_shift(cyclic_shift(g, 1, 0), 2, 0), cyclic_shift(g, 3, 0))


def test_shift_theorem(rng):
    g = rng.standard_normal((8, 8))
    di, dj = 3, 5
    u = np.arange(8)[:, None]
    v = np.arange(8)[None, :]
    phase = np.exp(-2j * np.pi * (u * di / 8 + v * dj / 8))
    assert np.max(np.abs(fft2(cyclic_shift(g, di, dj)) - fft2(g) * phase)) < 1e-9


def test_hann_degenerate_and_endpoints():
    np.testing.assert_array_equal(hann_window(1, 1), [[1.0]])
    w = hann_window(3, 3)
    assert w[1, 1] == pytest.approx(1.0)
    border = np.concatenate([w[0], w[-1], w[:, 0], w[:, -1]])
    assert np.all(np.abs(border) < 1e-15)


def test_hann_interior_value():
    assert hann_window(5, 5)[1, 2] == pytest.approx(0.5, abs=1e-15)


def test_label_peak_and_value():
    lab = gaussian_label(8, 8, 1.0)
    assert lab[0, 0] == 1.0
    assert lab[1, 0] == pytest.approx(math.exp(-0.5), rel=1e-15)
    assert lab[1, 0] == pytest.approx(0.606531, abs=1e-6)


def test_label_flat_limit():
    assert np.all(np.abs(gaussian_label(8, 8, 1e6) - 1.0) < 1e-9)


@pytest.mark.parametrize("shape", [(8, 8), (7, 10), (1, 5)])
def test_label_is_wrap_symmetric(shape):
    lab = gaussian_label(*shape, 1.7)
    flipped = np.roll(lab[::-1, ::-1], (1, 1), axis=(0, 1))
    np.testing.assert_array_equal(lab, flipped)


@pytest.mark.parametrize("index,size,expected", [(0, 8, 0), (3, 8, 3), (4, 8, 4), (5, 8, -3), (7, 8, -1)])
def test_wrapped_offset(index, size, expected):
    assert wrapped_offset(index, size) == expected
