"""Single-object correlation-filter trackers over grayscale features.

Two families share one code path and differ only in the model they keep:

* kernelized (``spatial``, ``frequency``, ``dual``, ``feature-first``): a
  feature template plus dual coefficients trained by kernel ridge regression
  over all cyclic shifts;
* ratio (``mosse-fractional``, ``asef-direct``): a numerator/denominator
  filter ``G * conj(F) / (F * conj(F))``.

The model size is fixed at init; only the box moves.  There is no scale
search and no sub-pixel refinement.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from .errors import InvalidInputError
from .kernels import KernelSpec, detect_response, kernel_correlation, train_alpha
from .spectral import fft2, gaussian_label, hann_window, ifft2, wrapped_offset
from .updates import (
    STRATEGIES,
    DualModel,
    FilterModel,
    FrequencyTemplate,
    RatioModel,
    SpatialTemplate,
    check_eta,
    realized_filter,
    update_direct_ratio,
    update_dual,
    update_fractional,
    update_frequency,
    update_spatial,
)

__all__ = [
    "BoundingBox",
    "TrackerConfig",
    "TrackerState",
    "model_shape_for",
    "extract_features",
    "features_at",
    "init_tracker",
    "track_step",
    "response_map",
    "filter_spatial",
    "psr",
]

KERNEL_STRATEGIES = ("spatial", "frequency", "dual", "feature-first")
RATIO_STRATEGIES = ("mosse-fractional", "asef-direct")

PSR_EXCLUSION = 11


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box, 0-based top-left corner in pixel units."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise InvalidInputError(f"box must have positive size, got {self.w}x{self.h}")
        if not all(math.isfinite(v) for v in (self.x, self.y, self.w, self.h)):
            raise InvalidInputError("box coordinates must be finite")

    @property
    def center(self) -> tuple[float, float]:
        """(row, col) of the box center in pixel-index coordinates."""
        return self.y + (self.h - 1) / 2.0, self.x + (self.w - 1) / 2.0

    def moved(self, drow: float, dcol: float) -> "BoundingBox":
        return BoundingBox(self.x + dcol, self.y + drow, self.w, self.h)

    @classmethod
    def from_one_based(cls, x, y, w, h) -> "BoundingBox":
        return cls(x - 1.0, y - 1.0, w, h)

    def one_based(self) -> tuple[float, float, float, float]:
        return self.x + 1.0, self.y + 1.0, self.w, self.h


@dataclass(frozen=True)
class TrackerConfig:
    eta: float = 0.025
    lam: float = 1e-4
    kernel: KernelSpec = field(default_factory=lambda: KernelSpec.gaussian(0.5))
    padding: float = 1.5
    output_sigma_factor: float = 0.1
    strategy: str = "dual"
    mosse_plus_eta: bool = False

    def __post_init__(self):
        check_eta(self.eta)
        if self.strategy not in STRATEGIES:
            raise InvalidInputError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if not self.lam > 0:
            raise InvalidInputError(f"lambda must be positive, got {self.lam}")
        if not self.padding >= 0:
            raise InvalidInputError(f"padding must be >= 0, got {self.padding}")
        if not self.output_sigma_factor > 0:
            raise InvalidInputError("output_sigma_factor must be positive")


@dataclass(frozen=True, eq=False)
class TrackerState:
    config: TrackerConfig
    model: FilterModel
    window: np.ndarray
    label_hat: np.ndarray
    current_box: BoundingBox
    frame_index: int = 0

    @property
    def model_shape(self) -> tuple[int, int]:
        return self.window.shape


def model_shape_for(box: BoundingBox, config: TrackerConfig) -> tuple[int, int]:
    """Padded window size rounded to even numbers (at least 2)."""
    scale = 1.0 + config.padding
    h = max(2, 2 * int(round(box.h * scale / 2.0)))
    w = max(2, 2 * int(round(box.w * scale / 2.0)))
    return h, w


def _window_pixels(box: BoundingBox, config: TrackerConfig) -> tuple[float, float]:
    scale = 1.0 + config.padding
    return box.h * scale, box.w * scale


def extract_features(frame, box: BoundingBox, config: TrackerConfig, shape=None, window=None) -> np.ndarray:
    """Crop the padded window around ``box``, resample to the model size and taper.

    Pixels outside the frame replicate the border.  Intensities are mapped from
    ``[0, 255]`` to ``[-0.5, 0.5]`` before the Hann window is applied.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2 or frame.size == 0:
        raise InvalidInputError(f"frame must be a nonempty 2D array, got shape {frame.shape}")
    if shape is None:
        shape = model_shape_for(box, config)
    mh, mw = shape
    if window is None:
        window = hann_window(mh, mw)
    win_h, win_w = _window_pixels(box, config)
    cy, cx = box.center
    rows = cy + (np.arange(mh) - (mh - 1) / 2.0) * (win_h / mh)
    cols = cx + (np.arange(mw) - (mw - 1) / 2.0) * (win_w / mw)
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    patch = ndimage.map_coordinates(frame, [rr, cc], order=1, mode="nearest")
    return (patch / 255.0 - 0.5) * window


# kernelized helpers ---------------------------------------------------------


def _kcorr(a, b, config: TrackerConfig) -> np.ndarray:
    # inputs scaled by 1/sqrt(N): kernel parameters are then per-element, independent of window size
    s = 1.0 / math.sqrt(a.size)
    return kernel_correlation(a * s, b * s, config.kernel)


def _train(x, label_hat, config: TrackerConfig) -> np.ndarray:
    return train_alpha(fft2(_kcorr(x, x, config)), label_hat, config.lam)


def _kernel_parts(state: TrackerState) -> tuple[np.ndarray, np.ndarray]:
    """Spatial feature template and dual coefficients of a kernelized model."""
    model, cfg = state.model, state.config
    if isinstance(model, SpatialTemplate):
        return model.T, _train(model.T, state.label_hat, cfg)
    if isinstance(model, FrequencyTemplate):
        M = ifft2(model.Xhat)
        return M, _train(M, state.label_hat, cfg)
    M = ifft2(model.Mhat)
    return M, model.alpha_hat


def _ratio_terms(x, label_hat) -> tuple[np.ndarray, np.ndarray]:
    F = fft2(x)
    return label_hat * np.conj(F), F * np.conj(F)


def _initial_model(x, label_hat, config: TrackerConfig) -> FilterModel:
    s = config.strategy
    if s == "spatial":
        return SpatialTemplate(T=x.copy())
    if s == "frequency":
        return FrequencyTemplate(Xhat=fft2(x))
    if s in ("dual", "feature-first"):
        Mhat = fft2(x)
        return DualModel(alpha_hat=_train(ifft2(Mhat), label_hat, config), Mhat=Mhat)
    A, B = _ratio_terms(x, label_hat)
    if s == "mosse-fractional":
        return RatioModel(A=A, B=B, mode="fractional")
    H = realized_filter(RatioModel(A=A, B=B, mode="fractional"))
    return RatioModel(A=A, B=B, mode="direct", H=H)


def _updated_model(state: TrackerState, x) -> FilterModel:
    model, cfg, label_hat = state.model, state.config, state.label_hat
    s, eta = cfg.strategy, cfg.eta
    if s == "spatial":
        return SpatialTemplate(T=update_spatial(model.T, x, eta))
    if s == "frequency":
        return FrequencyTemplate(Xhat=update_frequency(model.Xhat, fft2(x), eta))
    if s == "dual":
        Mhat_curr = fft2(x)
        alpha_curr = _train(ifft2(Mhat_curr), label_hat, cfg)
        return update_dual(model, Mhat_curr, alpha_curr, eta)
    if s == "feature-first":
        Mhat = update_frequency(model.Mhat, fft2(x), eta)
        return DualModel(alpha_hat=_train(ifft2(Mhat), label_hat, cfg), Mhat=Mhat)
    A_new, B_new = _ratio_terms(x, label_hat)
    if s == "mosse-fractional":
        return update_fractional(model, A_new, B_new, eta, plus_eta=cfg.mosse_plus_eta)
    H = update_direct_ratio(model.H, A_new, B_new, eta)
    return RatioModel(A=A_new, B=B_new, mode="direct", H=H)


# public operations ----------------------------------------------------------


def init_tracker(frame, box: BoundingBox, config: TrackerConfig) -> TrackerState:
    """Train the first-frame model for ``config.strategy`` on ``box``."""
    shape = model_shape_for(box, config)
    window = hann_window(*shape)
    sigma_y = config.output_sigma_factor * math.sqrt(shape[0] * shape[1]) / (1.0 + config.padding)
    label_hat = fft2(gaussian_label(shape[0], shape[1], sigma_y))
    x = extract_features(frame, box, config, shape, window)
    model = _initial_model(x, label_hat, config)
    return TrackerState(config=config, model=model, window=window, label_hat=label_hat, current_box=box)


def features_at(state: TrackerState, frame, box: Optional[BoundingBox] = None) -> np.ndarray:
    box = state.current_box if box is None else box
    return extract_features(frame, box, state.config, state.model_shape, state.window)


def response_map(state: TrackerState, z) -> np.ndarray:
    """Correlation response of the current model to feature patch ``z``."""
    if state.config.strategy in RATIO_STRATEGIES:
        return ifft2(realized_filter(state.model) * fft2(z))
    M, alpha_hat = _kernel_parts(state)
    return detect_response(alpha_hat, _kcorr(M, z, state.config))


def filter_spatial(state: TrackerState) -> np.ndarray:
    """The filter applied at detection time, brought back to the spatial domain.

    Ratio models give ``ifft2(H)``; kernelized models give the spatial dual
    coefficients ``ifft2(alpha_hat)``.
    """
    if state.config.strategy in RATIO_STRATEGIES:
        return ifft2(realized_filter(state.model))
    return ifft2(_kernel_parts(state)[1])


def psr(response) -> float:
    """Peak-to-sidelobe ratio; the sidelobe excludes an 11x11 (wrapped) patch at the peak."""
    r = np.asarray(response, dtype=np.float64)
    H, W = r.shape
    pi, pj = np.unravel_index(int(np.argmax(r)), r.shape)
    half = PSR_EXCLUSION // 2
    mask = np.ones(r.shape, dtype=bool)
    rows = np.arange(pi - half, pi + half + 1) % H
    cols = np.arange(pj - half, pj + half + 1) % W
    mask[np.ix_(rows, cols)] = False
    side = r[mask]
    if side.size < 2:
        return 0.0
    sd = float(np.std(side))
    if sd == 0.0:
        return 0.0
    return (float(r[pi, pj]) - float(np.mean(side))) / sd


def track_step(state: TrackerState, frame) -> tuple[TrackerState, BoundingBox, float]:
    """Locate the target in ``frame``, then fold the new appearance into the model."""
    z = features_at(state, frame)
    resp = response_map(state, z)
    H, W = resp.shape
    pi, pj = np.unravel_index(int(np.argmax(resp)), resp.shape)
    win_h, win_w = _window_pixels(state.current_box, state.config)
    drow = wrapped_offset(int(pi), H) * (win_h / H)
    dcol = wrapped_offset(int(pj), W) * (win_w / W)
    box = state.current_box.moved(drow, dcol)
    x = features_at(state, frame, box)
    new_state = dataclasses.replace(
        state, model=_updated_model(state, x), current_box=box, frame_index=state.frame_index + 1
    )
    return new_state, box, psr(resp)
