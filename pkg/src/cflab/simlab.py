"""Scalar simulations of the update rules.

``simulate_kernel_update`` contrasts interpolating the feature before the
kernel with interpolating the dual coefficient after it.
``simulate_fractional`` contrasts interpolating a ratio filter directly with
interpolating its numerator and denominator separately.  Both return a
:class:`CurveTable` that serializes to CSV.
"""

from __future__ import annotations

import io
import math
import os
import tempfile
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .kernels import KernelSpec
from .updates import check_eta, lerp, robustness_closed_forms

__all__ = [
    "Grid",
    "KernelSimConfig",
    "FractionalSimConfig",
    "CurveTable",
    "parse_grid",
    "scalar_kernel",
    "simulate_kernel_update",
    "simulate_fractional",
]


@dataclass(frozen=True)
class Grid:
    """Inclusive arithmetic grid ``start, start + step, ..., stop``."""

    start: float
    stop: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise InvalidInputError(f"grid step must be positive, got {self.step}")
        if not self.start < self.stop:
            raise InvalidInputError(f"grid needs start < stop, got {self.start}:{self.stop}")

    def values(self) -> np.ndarray:
        # start + k*step keeps round numbers like 2.0 exactly on the grid
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9))
        return self.start + np.arange(n + 1) * self.step


def parse_grid(text: str) -> Grid:
    """Parse ``"min:max:step"``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidInputError(f"grid must look like min:max:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise InvalidInputError(f"grid must look like min:max:step, got {text!r}") from None
    return Grid(start, stop, step)


@dataclass(frozen=True)
class KernelSimConfig:
    x_init: float = 2.0
    eta: float = 0.025
    y: float = 1.0
    lam: float = 1e-4
    kernel: KernelSpec = field(default_factory=lambda: KernelSpec.gaussian(60.0))
    x_curr_grid: Grid = Grid(-300.0, 300.0, 0.5)

    def __post_init__(self):
        check_eta(self.eta)
        if not self.lam > 0:
            raise InvalidInputError(f"lambda must be positive, got {self.lam}")
        if self.kernel.kind == "linear":
            raise InvalidInputError("the kernel simulation supports gaussian and polynomial kernels")


@dataclass(frozen=True)
class FractionalSimConfig:
    a_prev: float = 1.0
    b_prev: float = 2.0
    a_new: float = 1.0
    b_new_grid: Grid = Grid(1.0, 3.0, 0.01)
    eta: float = 0.025
    plus_eta_variant: bool = False

    def __post_init__(self):
        check_eta(self.eta)
        if self.b_prev == 0:
            raise InvalidInputError("b_prev must be nonzero")
        if np.any(self.b_new_grid.values() == 0):
            raise InvalidInputError("b_new grid must exclude 0")


@dataclass
class CurveTable:
    """Column-oriented table: one abscissa plus named curves."""

    abscissa_name: str
    columns: list[str]
    rows: np.ndarray
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.columns) + 1:
            raise InvalidInputError(
                f"rows must have {len(self.columns) + 1} columns, got shape {self.rows.shape}"
            )
        if self.rows.shape[0] > 1 and not np.all(np.diff(self.rows[:, 0]) > 0):
            raise InvalidInputError("abscissa must be strictly increasing")

    @property
    def header(self) -> list[str]:
        return [self.abscissa_name, *self.columns]

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.header.index(name)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.header) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        write_text_atomic(path, self.to_csv())


def _fmt(v: float) -> str:
    # repr is the shortest string that round-trips; inf/nan print as "inf"/"nan"
    return repr(float(v))


def write_text_atomic(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def scalar_kernel(x, cfg: KernelSimConfig, clamp_counter: list | None = None):
    """Self-kernel of a scalar feature with the norm frozen at ``x_init ** 2``.

    Gaussian: ``exp(-(2 x_init^2 - 2 x^2) / sigma^2)``; polynomial:
    ``(x^2 + a) ** b``.  Overflow is clamped to the largest finite double; the
    number of clamped entries is appended to ``clamp_counter`` when given.
    """
    x = np.asarray(x, dtype=np.float64)
    spec = cfg.kernel
    with np.errstate(over="ignore"):
        if spec.kind == "gaussian":
            k = np.exp(-(2.0 * cfg.x_init**2 - 2.0 * x * x) / spec.sigma**2)
        else:
            k = (x * x + spec.a) ** int(spec.b)
    overflow = ~np.isfinite(k)
    n = int(np.count_nonzero(overflow))
    if n:
        k = np.where(overflow, np.finfo(np.float64).max, k)
        warnings.warn(f"scalar kernel overflowed at {n} point(s); clamped", RuntimeWarning, stacklevel=2)
    if clamp_counter is not None:
        clamp_counter.append(n)
    return k if k.ndim else float(k)


def simulate_kernel_update(cfg: KernelSimConfig) -> CurveTable:
    """Feature-first (red) versus coefficient interpolation (green) over a grid of x_curr."""
    clamps: list[int] = []

    def alpha(v):
        return cfg.y / (scalar_kernel(v, cfg, clamps) + cfg.lam)

    x_curr = cfg.x_curr_grid.values()
    x_upd = lerp(np.full_like(x_curr, cfg.x_init), x_curr, cfg.eta)
    red = alpha(x_upd)
    green = lerp(np.full_like(x_curr, alpha(cfg.x_init)), alpha(x_curr), cfg.eta)
    table = CurveTable("x_upd", ["alpha_red", "alpha_green"], np.column_stack([x_upd, red, green]))
    table.notes["clamped"] = sum(clamps)
    return table


def simulate_fractional(cfg: FractionalSimConfig) -> CurveTable:
    """Direct versus fractional ratio-filter updates and their robustness over B_new."""
    b_new = cfg.b_new_grid.values()
    h_prev = cfg.a_prev / cfg.b_prev
    rows = []
    for b in b_new:
        direct = float(lerp(h_prev, cfg.a_new / b, cfg.eta))
        if cfg.plus_eta_variant:
            num = cfg.eta * cfg.a_new + (1.0 + cfg.eta) * cfg.a_prev
            den = cfg.eta * b + (1.0 + cfg.eta) * cfg.b_prev
        else:
            num = float(lerp(cfg.a_prev, cfg.a_new, cfg.eta))
            den = float(lerp(cfg.b_prev, b, cfg.eta))
        r_asef, r_mosse = robustness_closed_forms(
            cfg.a_new, b, cfg.a_prev, cfg.b_prev, cfg.eta, plus_eta=cfg.plus_eta_variant
        )
        rows.append((b, direct, num / den, r_asef, r_mosse))
    return CurveTable("b_new", ["filter_direct", "filter_fractional", "r_asef", "r_mosse"], rows)
