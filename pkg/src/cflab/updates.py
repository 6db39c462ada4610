"""Model-update rules for correlation filters and the robustness indicator.

Every rule is a pure function.  Interpolation uses an exact two-sided lerp,
so ``eta == 1`` returns the current value bit-for-bit and ``prev == curr`` is
an exact fixed point.  The rules are linear in their inputs, which makes the
spatial and frequency variants commute with the DFT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DimensionError, InvalidInputError

__all__ = [
    "STRATEGIES",
    "SpatialTemplate",
    "FrequencyTemplate",
    "DualModel",
    "RatioModel",
    "FilterModel",
    "check_eta",
    "lerp",
    "stabilizer",
    "realized_filter",
    "update_spatial",
    "update_frequency",
    "update_dual",
    "update_fractional",
    "update_direct_ratio",
    "robustness",
    "robustness_closed_forms",
    "filter_change_rate",
]

STRATEGIES = ("spatial", "frequency", "dual", "feature-first", "mosse-fractional", "asef-direct")


@dataclass(frozen=True, eq=False)
class SpatialTemplate:
    T: np.ndarray


@dataclass(frozen=True, eq=False)
class FrequencyTemplate:
    Xhat: np.ndarray


@dataclass(frozen=True, eq=False)
class DualModel:
    alpha_hat: np.ndarray
    Mhat: np.ndarray


@dataclass(frozen=True, eq=False)
class RatioModel:
    """Numerator/denominator filter state.

    In ``fractional`` mode the filter is realized as ``A / (B + eps)``.  In
    ``direct`` mode the interpolated filter itself is kept in ``H`` and
    ``A``/``B`` hold the most recent single-frame numerator and denominator.
    """

    A: np.ndarray
    B: np.ndarray
    mode: str = "fractional"
    H: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.mode not in ("fractional", "direct"):
            raise InvalidInputError(f"unknown ratio mode {self.mode!r}")
        if np.shape(self.A) != np.shape(self.B):
            raise DimensionError(f"shape mismatch: {np.shape(self.A)} vs {np.shape(self.B)}")
        if self.mode == "direct" and self.H is None:
            raise InvalidInputError("direct mode requires the realized filter H")


FilterModel = Union[SpatialTemplate, FrequencyTemplate, DualModel, RatioModel]


def check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 < eta <= 1.0:
        raise InvalidInputError(f"learning rate must lie in (0, 1], got {eta}")
    return eta


def _same_shape(*arrays):
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) != 1:
        raise DimensionError(f"shape mismatch: {sorted(shapes)}")


def lerp(prev, curr, eta: float):
    """``(1 - eta) * prev + eta * curr``, evaluated exactly at both endpoints."""
    prev = np.asarray(prev)
    curr = np.asarray(curr)
    diff = curr - prev
    if eta < 0.5:
        return prev + eta * diff
    return curr - (1.0 - eta) * diff


def stabilizer(B) -> float:
    """Additive term keeping ``A / (B + eps)`` finite where the energy spectrum vanishes."""
    return 1e-5 * float(np.mean(np.abs(B))) + 1e-12


def _eps(B, eps):
    return stabilizer(B) if eps is None else eps


def realized_filter(model: RatioModel, eps: Optional[float] = None) -> np.ndarray:
    """The filter a ratio model applies at detection time."""
    if model.mode == "direct":
        return model.H
    return model.A / (model.B + _eps(model.B, eps))


def update_spatial(T_prev, T_curr, eta: float) -> np.ndarray:
    eta = check_eta(eta)
    T_prev = np.asarray(T_prev, dtype=np.float64)
    T_curr = np.asarray(T_curr, dtype=np.float64)
    _same_shape(T_prev, T_curr)
    return lerp(T_prev, T_curr, eta)


def update_frequency(X_prev, X_curr, eta: float) -> np.ndarray:
    eta = check_eta(eta)
    X_prev = np.asarray(X_prev, dtype=np.complex128)
    X_curr = np.asarray(X_curr, dtype=np.complex128)
    _same_shape(X_prev, X_curr)
    return lerp(X_prev, X_curr, eta)


def update_dual(m: DualModel, Mhat_curr, alpha_curr, eta: float) -> DualModel:
    """Interpolate both the feature spectrum and the dual coefficients.

    ``alpha_curr`` is the single-frame solution trained on the current patch.
    """
    eta = check_eta(eta)
    _same_shape(m.alpha_hat, m.Mhat, Mhat_curr, alpha_curr)
    return DualModel(
        alpha_hat=lerp(m.alpha_hat, np.asarray(alpha_curr), eta),
        Mhat=lerp(m.Mhat, np.asarray(Mhat_curr), eta),
    )


def update_fractional(m: RatioModel, A_new, B_new, eta: float, plus_eta: bool = False) -> RatioModel:
    """Interpolate numerator and denominator separately with the same rate.

    ``plus_eta`` switches to the non-convex ``eta * new + (1 + eta) * prev``
    weighting, kept only for comparison runs.
    """
    eta = check_eta(eta)
    if m.mode != "fractional":
        raise InvalidInputError("update_fractional needs a fractional-mode model")
    _same_shape(m.A, m.B, A_new, B_new)
    A_new = np.asarray(A_new)
    B_new = np.asarray(B_new)
    if plus_eta:
        A = eta * A_new + (1.0 + eta) * m.A
        B = eta * B_new + (1.0 + eta) * m.B
    else:
        A = lerp(m.A, A_new, eta)
        B = lerp(m.B, B_new, eta)
    return RatioModel(A=A, B=B, mode="fractional")


def update_direct_ratio(H_prev, A_new, B_new, eta: float, eps: Optional[float] = None):
    """Interpolate the realized filter itself with the current single-frame filter.

    ``eps=None`` applies :func:`stabilizer` to ``B_new``; pass ``0.0`` for the
    unstabilized ratio.
    """
    eta = check_eta(eta)
    _same_shape(H_prev, A_new, B_new)
    B_new = np.asarray(B_new)
    current = np.asarray(A_new) / (B_new + _eps(B_new, eps))
    return lerp(np.asarray(H_prev), current, eta)


def robustness(A_i: float, B_i: float, A_prev: float, B_prev: float) -> float:
    """Reciprocal of the filter change between two ratio filters; ``inf`` if unchanged."""
    if B_i == 0 or B_prev == 0:
        raise InvalidInputError("robustness needs nonzero denominators")
    change = abs(A_i / B_i - A_prev / B_prev)
    return math.inf if change == 0 else 1.0 / change


def robustness_closed_forms(
    A_new: float, B_new: float, A_prev: float, B_prev: float, eta: float, plus_eta: bool = False
) -> tuple[float, float]:
    """Closed-form robustness of the direct (ASEF) and fractional (MOSSE) rules.

    Returns ``(R_asef, R_mosse)``; both are infinite when the new and previous
    single-frame filters coincide.
    """
    eta = check_eta(eta)
    if B_new == 0 or B_prev == 0:
        raise InvalidInputError("closed forms need nonzero denominators")
    cross = abs(eta * (A_new * B_prev - A_prev * B_new))
    if cross == 0:
        return math.inf, math.inf
    keep = (1.0 + eta) if plus_eta else (1.0 - eta)
    r_asef = abs(B_new * B_prev) / cross
    r_mosse = abs((eta * B_new + keep * B_prev) * B_prev) / cross
    return r_asef, r_mosse


def filter_change_rate(H_prev, H_curr) -> tuple[float, float]:
    """Mean and max of the entrywise change ``|H_curr - H_prev|`` between two filters."""
    _same_shape(H_prev, H_curr)
    delta = np.abs(np.asarray(H_curr) - np.asarray(H_prev))
    return float(np.mean(delta)), float(np.max(delta))
