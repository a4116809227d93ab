"""Motion between consecutive frames: block-matching flow and bilinear warping.

A flow field is a float array of shape ``(H, W, 2)`` holding ``(dx, dy)``.
Warping is backward: ``out[y, x] = frame[y + dy, x + dx]``, so the flow at
a pixel of the current frame points at where its content sat in the
previous one.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import ProtocolError, ShapeError
from ..imaging import check_same_shape
from .config import DecoderConfig


def zero_flow(shape) -> np.ndarray:
    return np.zeros((*shape[:2], 2), dtype=np.float64)


def _candidate_offsets(radius: int) -> list[tuple[int, int]]:
    offsets = [(dx, dy) for dy in range(-radius, radius + 1) for dx in range(-radius, radius + 1)]
    # argmin keeps the first minimum, so the list order is the tie-break
    offsets.sort(key=lambda d: (d[0] ** 2 + d[1] ** 2, abs(d[1]), abs(d[0]), d[1], d[0]))
    return offsets


def block_matching_flow(previous, current, block_size: int = 8, search_radius: int = 4) -> np.ndarray:
    """Integer flow from exhaustive sum-of-absolute-differences block search.

    Every ``block_size`` square of ``current`` gets the displacement ``d``
    within ``search_radius`` minimising ``sum |current(p) - previous(p + d)|``.
    Ties go to the smallest displacement. Out-of-frame samples are clamped.
    """
    previous = np.asarray(previous, dtype=np.int32)
    current = np.asarray(current, dtype=np.int32)
    if previous.shape != current.shape:
        raise ShapeError(f"dimension mismatch: {previous.shape} vs {current.shape}")
    if previous.ndim == 2:
        previous, current = previous[..., None], current[..., None]
    h, w = current.shape[:2]
    r, b = search_radius, block_size
    ny, nx = -(-h // b), -(-w // b)
    padded = np.pad(previous, ((r, r), (r, r), (0, 0)), mode="edge")
    offsets = _candidate_offsets(r)
    costs = np.empty((len(offsets), ny, nx), dtype=np.int64)
    diff = np.zeros((ny * b, nx * b), dtype=np.int64)
    for i, (dx, dy) in enumerate(offsets):
        shifted = padded[r + dy:r + dy + h, r + dx:r + dx + w]
        diff[:h, :w] = np.abs(current - shifted).sum(axis=2)
        costs[i] = diff.reshape(ny, b, nx, b).sum(axis=(1, 3))
    best = np.asarray(offsets, dtype=np.float64)[costs.argmin(axis=0)]
    flow = np.repeat(np.repeat(best, b, axis=0), b, axis=1)
    return flow[:h, :w]


def estimate_flow(prev_frames: Sequence[np.ndarray], sketches: Sequence[np.ndarray], cfg: DecoderConfig = DecoderConfig()) -> np.ndarray:
    """Flow from the last generated frame to the frame being generated.

    ``sketches`` runs over the same window as ``prev_frames`` plus the
    current frame's sketch as its last element. The reference block matcher
    compares the last two sketches only.
    """
    if len(prev_frames) == 0:
        raise ProtocolError("flow estimation needs at least one previous frame")
    if len(sketches) == 0:
        raise ProtocolError("flow estimation needs the current sketch")
    check_same_shape(*prev_frames, *sketches)
    if cfg.flow_estimator == "zero":
        return zero_flow(sketches[-1].shape)
    if len(sketches) < 2:
        raise ProtocolError("block matching needs the previous and the current sketch")
    return block_matching_flow(sketches[-2], sketches[-1], cfg.block_size, cfg.search_radius)


def warp(frame, flow, border: str = "clamp") -> np.ndarray:
    """Bilinearly resample ``frame`` at ``p + flow(p)``.

    ``border="clamp"`` repeats edge pixels, ``border="zero"`` reads zeros
    outside the frame. 2-D and 3-D uint8 rasters are accepted; the result is
    rounded half-to-even back to uint8.
    """
    frame = np.asarray(frame)
    flow = np.asarray(flow, dtype=np.float64)
    if flow.shape != (*frame.shape[:2], 2):
        raise ShapeError(f"flow of shape {flow.shape} does not match frame {frame.shape}")
    if not np.isfinite(flow).all():
        raise ValueError("flow contains non-finite values")
    if border not in ("clamp", "zero"):
        raise ValueError(f"unknown border policy {border!r}")
    h, w = frame.shape[:2]
    ys, xs = np.mgrid[0:h, 0:w]
    x = xs + flow[..., 0]
    y = ys + flow[..., 1]
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    fx = x - x0
    fy = y - y0

    src = frame.astype(np.float64)
    if src.ndim == 2:
        src = src[..., None]
    out = np.zeros((h, w, src.shape[2]), dtype=np.float64)
    for oy, wy in ((0, 1.0 - fy), (1, fy)):
        for ox, wx in ((0, 1.0 - fx), (1, fx)):
            xi, yi = x0 + ox, y0 + oy
            weight = wx * wy
            if border == "clamp":
                sample = src[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)]
            else:
                inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
                sample = src[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)]
                sample = sample * inside[..., None]
            out += weight[..., None] * sample
    out = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return out[..., 0] if frame.ndim == 2 else out
