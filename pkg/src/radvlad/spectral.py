"""Radial DFT magnitudes of polar scans, with a direct-evaluation oracle.

The transform runs along the range axis of each azimuth row:

    F(rho) = sum_r x[r] * exp(-i 2 pi rho r / W)

and only the complex magnitude |F| is kept, which is invariant to cyclic
shifts of the row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NumericError
from .scans import PolarScan


@dataclass(frozen=True)
class SpectralScan:
    """Per-azimuth radial DFT magnitudes; same shape as the source scan."""

    magnitude: np.ndarray

    def __post_init__(self):
        mag = np.asarray(self.magnitude, dtype=np.float64)
        if mag.ndim != 2:
            raise ArgumentError(f"magnitude must be 2-D, got shape {mag.shape}")
        if not np.isfinite(mag).all() or mag.min() < 0.0:
            raise ArgumentError("magnitude must be finite and non-negative")
        object.__setattr__(self, "magnitude", mag)

    @property
    def azimuth_count(self) -> int:
        return self.magnitude.shape[0]

    @property
    def bin_count(self) -> int:
        return self.magnitude.shape[1]


def radial_fft_magnitude(scan: PolarScan) -> SpectralScan:
    """DFT magnitude of every azimuth row, via the FFT."""
    power = scan.power
    if not np.isfinite(power).all():
        raise NumericError("scan power contains non-finite samples")
    return SpectralScan(np.abs(np.fft.fft(power, axis=1)))


def naive_dft_magnitude(row) -> np.ndarray:
    """Direct O(W^2) evaluation of the radial DFT magnitude of one row.

    Each output frequency is the explicit sum over range bins, with no
    fast-transform recursion; this is the reference implementation that
    radial_fft_magnitude is checked against.
    """
    x = np.asarray(row, dtype=np.float64).ravel()
    width = x.size
    if width < 1:
        raise ArgumentError("row must contain at least one sample")
    if not np.isfinite(x).all():
        raise NumericError("row contains non-finite samples")
    r = np.arange(width)
    out = np.empty(width)
    for rho in range(width):
        out[rho] = np.abs(np.sum(x * np.exp(-2j * np.pi * rho * r / width)))
    return out
