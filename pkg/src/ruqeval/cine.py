"""Cine-loop standardization: uniform temporal sampling to a fixed frame
count, cyclic padding for short loops, bicubic resizing, and intensity
normalization.

Temporal sampling uses pure integer arithmetic so plans are exact and
platform-independent. The resize kernel is Catmull-Rom (a = -0.5). Fan
masking and overlay removal are assumed already applied upstream.
"""

from __future__ import annotations

import json
import pathlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError

__all__ = [
    "DEFAULT_TARGET_LENGTH",
    "DEFAULT_FRAME_SPEC",
    "SamplingPlan",
    "FrameSpec",
    "sampling_indices",
    "standardize_loop",
    "resize_bicubic",
    "normalize_intensity",
    "normalize_loop",
    "preprocess_loop",
    "load_loop",
    "plan_to_json",
]

DEFAULT_TARGET_LENGTH = 32


@dataclass(frozen=True)
class SamplingPlan:
    source_length: int
    target_length: int
    indices: tuple[int, ...]
    mode: str  # sampled | padded | identity


@dataclass(frozen=True)
class FrameSpec:
    height: int = 224
    width: int = 224
    intensity_range: tuple[float, float] = (0.0, 1.0)
    interpolation: str = "bicubic"

    def validate(self) -> None:
        if self.height < 1 or self.width < 1:
            raise InputError("frame dimensions must be positive")
        if self.interpolation != "bicubic":
            raise InputError(f"unsupported interpolation: {self.interpolation!r}")
        low, high = self.intensity_range
        if not low < high:
            raise InputError(f"invalid intensity range: {self.intensity_range}")


DEFAULT_FRAME_SPEC = FrameSpec()


def sampling_indices(N: int, T: int = DEFAULT_TARGET_LENGTH) -> SamplingPlan:
    """Temporal sampling plan mapping an N-frame loop onto T slots.

    N >= T picks indices[k] = floor(k*(N-1)/(T-1)), which always keeps the
    first and last source frame; N < T replays the loop cyclically
    (indices[k] = k mod N). T = 1 degenerates to the first frame.
    """
    if N < 1:
        raise InputError(f"source length must be >= 1, got {N}")
    if T < 1:
        raise InputError(f"target length must be >= 1, got {T}")
    if N == T:
        indices = tuple(range(N))
        mode = "identity"
    elif N > T:
        if T == 1:
            indices = (0,)
        else:
            indices = tuple(k * (N - 1) // (T - 1) for k in range(T))
        mode = "sampled"
    else:
        indices = tuple(k % N for k in range(T))
        mode = "padded"
    return SamplingPlan(source_length=N, target_length=T, indices=indices, mode=mode)


def standardize_loop(frames: Sequence, plan: SamplingPlan) -> list:
    """Replay frames according to the plan; no pixel is touched."""
    if len(frames) != plan.source_length:
        raise InputError(
            f"plan expects {plan.source_length} frames, got {len(frames)}"
        )
    return [frames[i] for i in plan.indices]


def _catmull_rom(distance: np.ndarray) -> np.ndarray:
    a = -0.5
    d = np.abs(distance)
    d2 = d * d
    d3 = d2 * d
    near = (a + 2.0) * d3 - (a + 3.0) * d2 + 1.0
    far = a * d3 - 5.0 * a * d2 + 8.0 * a * d - 4.0 * a
    return np.where(d <= 1.0, near, np.where(d < 2.0, far, 0.0))


def _axis_weights(n_in: int, n_out: int) -> np.ndarray:
    """Dense (n_out, n_in) interpolation matrix with edge-clamped support."""
    scale = n_in / n_out
    centers = (np.arange(n_out) + 0.5) * scale - 0.5
    base = np.floor(centers).astype(int)
    weights = np.zeros((n_out, n_in))
    for offset in range(-1, 3):
        source = base + offset
        w = _catmull_rom(centers - source)
        clamped = np.clip(source, 0, n_in - 1)
        np.add.at(weights, (np.arange(n_out), clamped), w)
    return weights


def resize_bicubic(grid, spec: FrameSpec = DEFAULT_FRAME_SPEC) -> np.ndarray:
    """Separable bicubic resize to spec.height x spec.width.

    The result is clamped to the input's min/max so ringing can never
    leave the observed intensity range.
    """
    spec.validate()
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2:
        raise InputError(f"expected a 2-D grid, got {grid.ndim}-D")
    if grid.shape[0] < 4 or grid.shape[1] < 4:
        raise InputError(f"grid must be at least 4x4, got {grid.shape}")
    rows = _axis_weights(grid.shape[0], spec.height)
    cols = _axis_weights(grid.shape[1], spec.width)
    out = rows @ grid @ cols.T
    return np.clip(out, grid.min(), grid.max())


def normalize_intensity(grid) -> np.ndarray:
    """Linear map of min->0 and max->1; constant input maps to zeros."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise InputError("cannot normalize an empty grid")
    low = grid.min()
    span = grid.max() - low
    if span == 0:
        return np.zeros_like(grid)
    return (grid - low) / span


def normalize_loop(frames: Sequence, per_frame: bool = True) -> list[np.ndarray]:
    """Normalize each frame independently, or the whole loop jointly."""
    if per_frame:
        return [normalize_intensity(f) for f in frames]
    stack = np.stack([np.asarray(f, dtype=np.float64) for f in frames])
    flat = normalize_intensity(stack)
    return [flat[i] for i in range(flat.shape[0])]


def preprocess_loop(
    frames: Sequence,
    target_length: int = DEFAULT_TARGET_LENGTH,
    spec: FrameSpec = DEFAULT_FRAME_SPEC,
    per_frame: bool = True,
) -> list[np.ndarray]:
    """Full pipeline: temporal plan, replay, resize, then normalize."""
    plan = sampling_indices(len(frames), target_length)
    sampled = standardize_loop(list(frames), plan)
    resized = [resize_bicubic(f, spec) for f in sampled]
    return normalize_loop(resized, per_frame=per_frame)


_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}


def load_loop(path) -> list[np.ndarray]:
    """Read a loop from a .npy stack or a directory of grayscale images.

    Directory frames are ordered by filename. Images are converted to
    8-bit grayscale and returned as float arrays in [0, 255].
    """
    path = pathlib.Path(path)
    if path.is_file() and path.suffix == ".npy":
        stack = np.load(path)
        if stack.ndim != 3:
            raise InputError(
                f"loop stack must be 3-D (frames, height, width), got {stack.ndim}-D"
            )
        return [stack[i].astype(np.float64) for i in range(stack.shape[0])]
    if path.is_dir():
        from PIL import Image

        files = sorted(
            p for p in path.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES
        )
        if not files:
            raise InputError(f"no image frames found in {path}")
        frames = []
        for file in files:
            with Image.open(file) as img:
                frames.append(np.asarray(img.convert("L"), dtype=np.float64))
        return frames
    raise InputError(f"loop path must be a .npy file or a directory: {path}")


def plan_to_json(plan: SamplingPlan) -> str:
    """Audit record of a sampling plan as compact JSON."""
    return json.dumps(
        {
            "source_length": plan.source_length,
            "target_length": plan.target_length,
            "mode": plan.mode,
            "indices": list(plan.indices),
        },
        sort_keys=True,
    )
