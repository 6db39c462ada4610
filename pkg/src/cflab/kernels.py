"""Kernel correlation over all cyclic shifts, dual-coefficient training and detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidInputError, SingularDenominatorError
from .spectral import as_grid, fft2, ifft2

__all__ = [
    "KernelSpec",
    "kernel_correlation",
    "kernel_value",
    "train_alpha",
    "detect_response",
    "gaussian_autocorr_factorization",
]

KERNEL_KINDS = ("gaussian", "polynomial", "linear")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice and parameters.

    ``sigma`` applies to the Gaussian kernel, ``a`` (additive term) and ``b``
    (exponent) to the polynomial kernel ``(<x, x'> + a) ** b``.
    """

    kind: str = "gaussian"
    sigma: float = 0.5
    a: float = 1.5
    b: int = 7

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise InvalidInputError(f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise InvalidInputError(f"gaussian kernel needs sigma > 0, got {self.sigma}")
        if self.kind == "polynomial":
            if int(self.b) != self.b or self.b < 1:
                raise InvalidInputError(f"polynomial exponent must be a positive integer, got {self.b}")
            if self.a < 0:
                raise InvalidInputError(f"polynomial additive term must be >= 0, got {self.a}")

    @classmethod
    def gaussian(cls, sigma: float) -> "KernelSpec":
        return cls("gaussian", sigma=sigma)

    @classmethod
    def polynomial(cls, a: float, b: int) -> "KernelSpec":
        return cls("polynomial", a=a, b=b)

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls("linear")


def _check_pair(x, xp):
    x = as_grid(x, "x")
    xp = as_grid(xp, "xp")
    if x.shape != xp.shape:
        raise DimensionError(f"shape mismatch: {x.shape} vs {xp.shape}")
    return x, xp


def kernel_value(x, xp, spec: KernelSpec) -> float:
    """Direct evaluation of the kernel on two equally shaped grids (no shifts)."""
    x, xp = _check_pair(x, xp)
    if spec.kind == "gaussian":
        return float(np.exp(-np.sum((x - xp) ** 2) / spec.sigma**2))
    dot = float(np.sum(x * xp))
    if spec.kind == "polynomial":
        return (dot + spec.a) ** int(spec.b)
    return dot


def kernel_correlation(x, xp, spec: KernelSpec) -> np.ndarray:
    """Kernel evaluated between ``xp`` and every cyclic shift of ``x``.

    Entry ``(i, j)`` equals ``kappa(xp, cyclic_shift(x, i, j))``.  Squared
    norms are taken in the spatial domain; no normalization by the number of
    elements is applied.
    """
    x, xp = _check_pair(x, xp)
    cross = ifft2(np.conj(fft2(x)) * fft2(xp))
    if spec.kind == "gaussian":
        d = np.sum(x * x) + np.sum(xp * xp) - 2.0 * cross
        return np.exp(-d / spec.sigma**2)
    if spec.kind == "polynomial":
        return (cross + spec.a) ** int(spec.b)
    return cross


def train_alpha(khat_xx, yhat, lam: float) -> np.ndarray:
    """Dual coefficients ``yhat / (khat_xx + lam)`` in the frequency domain."""
    khat_xx = np.asarray(khat_xx)
    yhat = np.asarray(yhat)
    if khat_xx.shape != yhat.shape:
        raise DimensionError(f"shape mismatch: {khat_xx.shape} vs {yhat.shape}")
    if not lam > 0:
        raise InvalidInputError(f"lambda must be positive, got {lam}")
    denom = khat_xx + lam
    if np.any(np.abs(denom) < 1e-12):
        raise SingularDenominatorError("kernel spectrum plus lambda vanishes at some frequency")
    return yhat / denom


def detect_response(alpha_hat, k_xz) -> np.ndarray:
    """Response map ``ifft2(fft2(k_xz) * alpha_hat)``; its argmax is the displacement."""
    alpha_hat = np.asarray(alpha_hat)
    k_xz = as_grid(k_xz, "k_xz")
    if alpha_hat.shape != k_xz.shape:
        raise DimensionError(f"shape mismatch: {alpha_hat.shape} vs {k_xz.shape}")
    return ifft2(fft2(k_xz) * alpha_hat)


def gaussian_autocorr_factorization(x, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the Gaussian autocorrelation factorization.

    ``lhs`` is the transform of the Gaussian self-correlation; ``rhs`` pulls the
    norm term out of the exponential as a scalar factor.  The two agree up to
    round-off for any input.
    """
    x = as_grid(x, "x")
    if not sigma > 0:
        raise InvalidInputError(f"sigma must be positive, got {sigma}")
    lhs = fft2(kernel_correlation(x, x, KernelSpec.gaussian(sigma)))
    auto = ifft2(np.conj(fft2(x)) * fft2(x))
    norm2 = np.sum(x * x)
    rhs = np.exp(-2.0 * norm2 / sigma**2) * fft2(np.exp(2.0 / sigma**2 * auto))
    return lhs, rhs
