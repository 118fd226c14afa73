import numpy as np
import pytest

from radvlad import (
    ArgumentError,
    NumericError,
    PolarScan,
    naive_dft_magnitude,
    radial_fft_magnitude,
)


def spectrum_of(rows):
    return radial_fft_magnitude(PolarScan(np.atleast_2d(rows), 1.0)).magnitude


class TestKnownSpectra:
    def test_constant_row_is_dc_only(self):
        c = 0.37
        mag = spectrum_of(np.full(512, c))[0]
        assert mag[0] == pytest.approx(512 * c, rel=1e-12)
        assert np.abs(mag[1:]).max() <= 1e-9 * 512 * c

    def test_unit_impulse_has_flat_spectrum(self):
        for width in (1, 4, 9):
            row = np.zeros(width)
            row[0] = 1.0
            assert np.allclose(spectrum_of(row)[0], np.ones(width), atol=1e-12)

    def test_naive_impulse(self):
        assert np.allclose(naive_dft_magnitude([1, 0, 0, 0]), [1, 1, 1, 1], atol=1e-12)

    def test_naive_constant(self):
        out = naive_dft_magnitude([1, 1, 1, 1])
        assert out[0] == pytest.approx(4.0, rel=1e-12)
        assert np.abs(out[1:]).max() < 1e-12 * 4

    def test_naive_shift_theorem(self):
        rng = np.random.default_rng(0)
        row = rng.random(16)
        base = naive_dft_magnitude(row)
        for shift in (1, 5, 15):
            rolled = naive_dft_magnitude(np.roll(row, shift))
            assert np.allclose(rolled, base, rtol=1e-12, atol=1e-12)


class TestOracleEquivalence:
    @pytest.mark.parametrize("width", [1, 2, 3, 4, 8, 512])
    def test_fft_matches_naive(self, width):
        rng = np.random.default_rng(width)
        for _ in range(3):
            row = rng.random(width)
            fast = spectrum_of(row)[0]
            slow = naive_dft_magnitude(row)
            scale = max(1e-300, np.abs(slow).max())
            assert np.abs(fast - slow).max() / scale <= 1e-9


class TestSpectralProperties:
    def test_cyclic_shift_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            row = rng.random(512)
            shift = int(rng.integers(512))
            a = spectrum_of(row)[0]
            b = spectrum_of(np.roll(row, shift))[0]
            assert np.abs(a - b).max() / np.abs(a).max() <= 1e-9

    def test_parseval(self):
        rng = np.random.default_rng(2)
        rows = rng.random((50, 512))
        mags = spectrum_of(rows)
        lhs = (mags**2).sum(axis=1)
        rhs = 512 * (rows**2).sum(axis=1)
        assert np.abs(lhs - rhs).max() / rhs.max() <= 1e-9

    def test_scaling_linearity(self):
        rng = np.random.default_rng(3)
        row = rng.random(64)
        base = spectrum_of(row)[0]
        for a in (0.0, 0.5, 3.0):
            scaled = spectrum_of(a * row)[0]
            assert np.allclose(scaled, a * base, rtol=1e-12, atol=1e-12)

    def test_output_shape_matches_input(self):
        rng = np.random.default_rng(4)
        scan = PolarScan(rng.random((400, 512)), 0.3)
        out = radial_fft_magnitude(scan)
        assert out.magnitude.shape == (400, 512)
        assert out.azimuth_count == 400
        assert out.bin_count == 512


class TestErrors:
    def test_naive_rejects_empty(self):
        with pytest.raises(ArgumentError):
            naive_dft_magnitude([])

    def test_naive_rejects_non_finite(self):
        with pytest.raises(NumericError):
            naive_dft_magnitude([1.0, np.inf])

    def test_fft_rejects_non_finite(self):
        scan = PolarScan(np.ones((2, 4)), 1.0)
        object.__setattr__(scan, "power", np.array([[1.0, np.nan, 0, 0], [0, 0, 0, 0]]))
        with pytest.raises(NumericError):
            radial_fft_magnitude(scan)
