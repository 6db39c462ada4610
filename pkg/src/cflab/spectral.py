"""Dense 2D grid arithmetic and the Fourier plumbing every filter relies on.

Real grids are ``float64`` arrays of shape ``(H, W)``; spectra are
``complex128`` arrays of the same shape.  The forward transform is
unnormalized and the inverse carries the ``1/(H*W)`` factor, so elementwise
identities such as ``ifft2(conj(fft2(x)) * fft2(y))`` give plain circular
cross-correlations.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, InvalidInputError, NumericalConsistencyError

__all__ = [
    "as_grid",
    "fft2",
    "ifft2",
    "cyclic_shift",
    "hann_window",
    "gaussian_label",
    "wrapped_offset",
]

# ifft2 rejects results whose imaginary residue exceeds this, relative to (1 + max|real|)
IMAG_TOLERANCE = 1e-8


def as_grid(g, name: str = "grid") -> np.ndarray:
    """Validate and coerce ``g`` to a finite 2D float64 array."""
    arr = np.asarray(g, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2D, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def fft2(g) -> np.ndarray:
    """Unnormalized forward 2D DFT of a real grid."""
    return np.fft.fft2(as_grid(g))


def ifft2(s) -> np.ndarray:
    """Inverse 2D DFT returning a real grid.

    The spectrum must be conjugate-symmetric up to round-off.  A larger
    imaginary residue means the caller combined spectra incorrectly, and is
    reported as :class:`NumericalConsistencyError` rather than silently
    dropped.
    """
    spec = np.asarray(s)
    if spec.ndim != 2 or spec.size == 0:
        raise DimensionError(f"spectrum must be a nonempty 2D array, got shape {spec.shape}")
    out = np.fft.ifft2(spec)
    real = out.real
    residue = float(np.max(np.abs(out.imag)))
    bound = IMAG_TOLERANCE * (1.0 + float(np.max(np.abs(real))))
    if not residue < bound:
        raise NumericalConsistencyError(
            f"inverse transform has imaginary residue {residue:.3e} (limit {bound:.3e})"
        )
    return np.ascontiguousarray(real)


def cyclic_shift(g, di: int, dj: int) -> np.ndarray:
    """Circularly shift ``g`` so that ``out[i, j] == g[(i - di) % H, (j - dj) % W]``."""
    arr = as_grid(g)
    return np.roll(arr, (int(di), int(dj)), axis=(0, 1))


def _hann1d(n: int) -> np.ndarray:
    if n == 1:
        return np.ones(1)
    k = np.arange(n)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * k / (n - 1)))


def hann_window(h: int, w: int) -> np.ndarray:
    """Separable Hann taper with zero endpoints; a length-1 axis is all ones."""
    if h < 1 or w < 1:
        raise InvalidInputError(f"window size must be positive, got {h}x{w}")
    return np.outer(_hann1d(h), _hann1d(w))


def gaussian_label(h: int, w: int, sigma_y: float) -> np.ndarray:
    """Gaussian desired response peaked at index (0, 0) with wrap-around distances."""
    if h < 1 or w < 1:
        raise InvalidInputError(f"label size must be positive, got {h}x{w}")
    if not sigma_y > 0:
        raise InvalidInputError(f"sigma_y must be positive, got {sigma_y}")
    i = np.arange(h)
    j = np.arange(w)
    di = np.minimum(i, h - i).astype(np.float64)
    dj = np.minimum(j, w - j).astype(np.float64)
    d2 = di[:, None] ** 2 + dj[None, :] ** 2
    return np.exp(-d2 / (2.0 * sigma_y**2))


def wrapped_offset(index: int, size: int) -> int:
    """Decode a circular index into a signed displacement (indices past size/2 are negative)."""
    return index - size if index > size / 2 else index
