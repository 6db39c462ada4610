"""OTB-style sequence ingestion, tracking runs, metrics and filter dumps."""

from __future__ import annotations

import math
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence as Seq

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import DataError, InvalidInputError
from .simlab import CurveTable, write_text_atomic
from .spectral import gaussian_label
from .tracker import (
    BoundingBox,
    TrackerConfig,
    TrackerState,
    features_at,
    filter_spatial,
    init_tracker,
    psr,
    response_map,
    track_step,
)
from .updates import filter_change_rate

__all__ = [
    "Sequence",
    "MetricsReport",
    "TrackingRun",
    "IMAGE_SUFFIXES",
    "load_frame",
    "load_sequence",
    "parse_groundtruth",
    "compute_metrics",
    "run_tracking",
    "compare_strategies",
    "dump_filter_images",
    "write_pgm",
    "boxes_csv",
    "report_csv",
    "synthesize_sequence",
]

IMAGE_SUFFIXES = (".png", ".pgm", ".ppm", ".jpg", ".jpeg")
PRECISION_THRESHOLD = 20.0
SUCCESS_THRESHOLDS = np.round(np.arange(21) * 0.05, 2)


@dataclass
class Sequence:
    name: str
    frame_paths: list[Path]
    ground_truth: list[Optional[BoundingBox]]

    def __post_init__(self):
        if not self.frame_paths:
            raise DataError(f"sequence {self.name!r} has no frames")
        if not self.ground_truth or self.ground_truth[0] is None:
            raise DataError(f"sequence {self.name!r} has no valid first ground-truth box")

    def __len__(self):
        return len(self.frame_paths)

    def frame(self, index: int) -> np.ndarray:
        return load_frame(self.frame_paths[index])


@dataclass
class MetricsReport:
    center_errors: np.ndarray
    precision_at_20: float
    overlaps: np.ndarray
    success_auc: float
    mean_psr: float


@dataclass
class TrackingRun:
    boxes: list[BoundingBox]
    psrs: list[float]
    report: MetricsReport
    change_rates: list[float] = field(default_factory=list)


# image and ground-truth I/O ---------------------------------------------------


def load_frame(path) -> np.ndarray:
    """Decode an image to float64 luma in [0, 255] (0.299 R + 0.587 G + 0.114 B)."""
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode == "L":
                return np.asarray(im, dtype=np.float64)
            if im.mode in ("I;16", "I;16B", "I"):
                arr = np.asarray(im, dtype=np.float64)
                return arr * (255.0 / 65535.0) if arr.max() > 255 else arr
            rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot decode image {path}: {exc}") from exc
    return 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]


def _frame_key(path: Path):
    digits = re.findall(r"\d+", path.stem)
    return (int(digits[-1]) if digits else math.inf, path.name)


def parse_groundtruth(text: str, source: str = "groundtruth_rect.txt") -> list[Optional[BoundingBox]]:
    """Parse ``x,y,w,h`` lines (comma, tab or whitespace separated, 1-based).

    Rows with a non-positive size (OTB marks absent targets that way) become
    ``None``.
    """
    boxes: list[Optional[BoundingBox]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = [p for p in re.split(r"[,\s]+", line) if p]
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise DataError(f"{source}:{lineno}: cannot parse {line!r}") from None
        if len(values) != 4 or not all(math.isfinite(v) for v in values):
            raise DataError(f"{source}:{lineno}: expected four numbers, got {line!r}")
        x, y, w, h = values
        boxes.append(BoundingBox.from_one_based(x, y, w, h) if w > 0 and h > 0 else None)
    return boxes


def load_sequence(directory) -> Sequence:
    """Load an OTB-layout directory: ``img/`` frames plus ``groundtruth_rect.txt``."""
    root = Path(directory)
    img_dir = root / "img"
    gt_path = root / "groundtruth_rect.txt"
    if not img_dir.is_dir():
        raise DataError(f"missing image folder {img_dir}")
    if not gt_path.is_file():
        raise DataError(f"missing ground-truth file {gt_path}")
    frames = sorted(
        (p for p in img_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file()), key=_frame_key
    )
    if not frames:
        raise DataError(f"no frames found in {img_dir}")
    gt = parse_groundtruth(gt_path.read_text(encoding="utf-8"), str(gt_path))
    return Sequence(name=root.name, frame_paths=frames, ground_truth=gt[: len(frames)])


# metrics ----------------------------------------------------------------------


def _iou(a: BoundingBox, b: BoundingBox) -> float:
    ix = max(0.0, min(a.x + a.w, b.x + b.w) - max(a.x, b.x))
    iy = max(0.0, min(a.y + a.h, b.y + b.h) - max(a.y, b.y))
    inter = ix * iy
    union = a.w * a.h + b.w * b.h - inter
    return inter / union if union > 0 else 0.0


def compute_metrics(boxes: Seq[BoundingBox], ground_truth: Seq[Optional[BoundingBox]], psrs) -> MetricsReport:
    """Center error, precision@20, IoU and success AUC over frames with valid ground truth.

    Success AUC is the mean success rate (IoU > t) over t = 0.00, 0.05, ..., 1.00.
    """
    errors, overlaps = [], []
    for box, gt in zip(boxes, ground_truth):
        if gt is None:
            continue
        (by, bx), (gy, gx) = box.center, gt.center
        errors.append(math.hypot(bx - gx, by - gy))
        overlaps.append(_iou(box, gt))
    errors = np.asarray(errors)
    overlaps = np.asarray(overlaps)
    if errors.size:
        precision = float(np.mean(errors <= PRECISION_THRESHOLD))
        auc = float(np.mean([np.mean(overlaps > t) for t in SUCCESS_THRESHOLDS]))
    else:
        precision = auc = 0.0
    psrs = np.asarray(psrs, dtype=np.float64)
    mean_psr = float(np.mean(psrs)) if psrs.size else 0.0
    return MetricsReport(errors, precision, overlaps, auc, mean_psr)


# tracking runs ----------------------------------------------------------------


def _iterate(seq: Sequence, cfg: TrackerConfig):
    """Yield ``(state, box, psr)`` per frame, starting with the initialized frame."""
    frame = seq.frame(0)
    state = init_tracker(frame, seq.ground_truth[0], cfg)
    yield state, state.current_box, psr(response_map(state, features_at(state, frame)))
    for k in range(1, len(seq)):
        state, box, p = track_step(state, seq.frame(k))
        yield state, box, p


def run_tracking(seq: Sequence, cfg: TrackerConfig, dump_dir=None) -> TrackingRun:
    """Initialize on the first ground-truth box and track through every frame.

    When ``dump_dir`` is given the realized filter of every frame is written
    there as a PGM image.
    """
    boxes, psrs, rates = [], [], []
    prev_filter = None
    for state, box, p in _iterate(seq, cfg):
        boxes.append(box)
        psrs.append(p)
        filt = filter_spatial(state)
        rates.append(math.nan if prev_filter is None else filter_change_rate(prev_filter, filt)[0])
        prev_filter = filt
        if dump_dir is not None:
            dump_filter_images([state], dump_dir)
    report = compute_metrics(boxes, seq.ground_truth, psrs)
    return TrackingRun(boxes=boxes, psrs=psrs, report=report, change_rates=rates)


def compare_strategies(seq: Sequence, cfgs: Seq[TrackerConfig]) -> CurveTable:
    """Per-frame center error, mean filter change rate and PSR for each strategy.

    Columns are ``frame`` followed by ``<strategy>_center_error``,
    ``<strategy>_change_rate`` and ``<strategy>_psr`` per config.  Frames
    without ground truth report ``nan`` error; the first frame has no change
    rate.
    """
    if not cfgs:
        raise InvalidInputError("compare_strategies needs at least one config")
    names = [c.strategy for c in cfgs]
    if len(set(names)) != len(names):
        raise InvalidInputError(f"duplicate strategies in comparison: {names}")
    if len({c.padding for c in cfgs}) != 1:
        raise InvalidInputError("all configs must share the same padding (feature geometry)")
    n = len(seq)
    columns, data = [], [np.arange(1, n + 1, dtype=np.float64)]
    for cfg in cfgs:
        run = run_tracking(seq, cfg)
        err = np.full(n, math.nan)
        for k, (box, gt) in enumerate(zip(run.boxes, seq.ground_truth)):
            if gt is not None:
                (by, bx), (gy, gx) = box.center, gt.center
                err[k] = math.hypot(bx - gx, by - gy)
        columns += [f"{cfg.strategy}_center_error", f"{cfg.strategy}_change_rate", f"{cfg.strategy}_psr"]
        data += [err, np.asarray(run.change_rates), np.asarray(run.psrs)]
    return CurveTable("frame", columns, np.column_stack(data))


# output writers ---------------------------------------------------------------


def _atomic_bytes(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_pgm(grid, path) -> Path:
    """Min-max normalize ``grid`` to 0..255 and write a binary (P5) PGM.

    A constant grid maps to mid-gray (128).
    """
    g = np.asarray(grid, dtype=np.float64)
    lo, hi = float(g.min()), float(g.max())
    if hi > lo:
        pixels = np.round((g - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        pixels = np.full(g.shape, 128, dtype=np.uint8)
    path = Path(path)
    header = f"P5\n{g.shape[1]} {g.shape[0]}\n255\n".encode("ascii")
    try:
        _atomic_bytes(path, header + pixels.tobytes())
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc
    return path


def dump_filter_images(states: Iterable[TrackerState], out_dir) -> list[Path]:
    """Write each state's spatial-domain filter as ``frame_{index:05}_{strategy}.pgm``.

    Frame numbers in file names are 1-based.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create {out}: {exc}") from exc
    paths = []
    for state in states:
        name = f"frame_{state.frame_index + 1:05}_{state.config.strategy}.pgm"
        paths.append(write_pgm(filter_spatial(state), out / name))
    return paths


def boxes_csv(boxes: Seq[BoundingBox], psrs: Seq[float]) -> str:
    lines = ["frame,x,y,w,h,psr"]
    for k, (box, p) in enumerate(zip(boxes, psrs), start=1):
        x, y, w, h = box.one_based()
        lines.append(",".join([str(k)] + [repr(float(v)) for v in (x, y, w, h, p)]))
    return "\n".join(lines) + "\n"


def report_csv(report: MetricsReport) -> str:
    rows = [
        ("frames_evaluated", float(report.center_errors.size)),
        ("precision_at_20", report.precision_at_20),
        ("success_auc", report.success_auc),
        ("mean_center_error", float(np.mean(report.center_errors)) if report.center_errors.size else 0.0),
        ("mean_overlap", float(np.mean(report.overlaps)) if report.overlaps.size else 0.0),
        ("mean_psr", report.mean_psr),
    ]
    return "metric,value\n" + "".join(f"{k},{v!r}\n" for k, v in rows)


def write_csv_text(path, text: str) -> None:
    try:
        write_text_atomic(path, text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


# synthetic benchmark ----------------------------------------------------------


def synthesize_sequence(
    out_dir,
    motion: str = "translate",
    step_px: float = 2.0,
    frames: int = 50,
    size: int = 256,
    patch: int = 64,
    seed: int = 7,
) -> Path:
    """Write a synthetic OTB-layout sequence: a textured patch moving over a textured background.

    ``translate`` moves the patch ``step_px`` pixels right per frame;
    ``static`` repeats the first frame.
    """
    if motion not in ("translate", "static"):
        raise InvalidInputError(f"unknown motion {motion!r}")
    if frames < 1:
        raise InvalidInputError("frames must be >= 1")
    rng = np.random.default_rng(seed)
    bg = ndimage.gaussian_filter(rng.uniform(0.0, 255.0, (size, size)), 3.0)
    bg = 100.0 + (bg - bg.mean()) * 0.5
    tex = ndimage.gaussian_filter(rng.uniform(0.0, 255.0, (patch, patch)), 1.5)
    tex = (tex - tex.min()) / (tex.max() - tex.min()) * 255.0
    # soft blob keeps a strong low-frequency cue in the target
    blob = gaussian_label(patch, patch, patch / 4.0)
    tex = 0.7 * tex + 0.3 * 255.0 * np.fft.fftshift(blob)

    travel = 0.0 if motion == "static" else step_px * (frames - 1)
    x0 = (size - patch - travel) / 2.0
    y0 = (size - patch) / 2.0
    if x0 < 0:
        raise InvalidInputError("motion leaves the frame; reduce frames or step")

    root = Path(out_dir)
    img = root / "img"
    img.mkdir(parents=True, exist_ok=True)
    lines = []
    for k in range(frames):
        dx = 0.0 if motion == "static" else step_px * k
        x = x0 + dx
        frame = bg.copy()
        xi, yi = int(round(x)), int(round(y0))
        frame[yi : yi + patch, xi : xi + patch] = tex
        Image.fromarray(np.clip(np.round(frame), 0, 255).astype(np.uint8)).save(img / f"{k + 1:04d}.png")
        lines.append(f"{xi + 1},{yi + 1},{patch},{patch}")
    (root / "groundtruth_rect.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return root
