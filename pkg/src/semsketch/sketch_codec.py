"""Sketch extraction, static-background composition, masked sketches and the MSV1 container.

The encoder turns each frame into a binary line drawing, keeps only the
foreground part of it (with in-mask non-edge pixels lifted to a sentinel so
the mask survives), and ships the first and last full sketches plus the
first colour frame as side information. The decoder rebuilds a full sketch
from those pieces.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import (
    BadMagicError,
    CorruptPayloadError,
    ProtocolError,
    ShapeError,
    TruncatedPayloadError,
    VersionMismatchError,
)
from .foreground import (
    DEFAULT_IOU_THRESHOLD,
    InstanceTrack,
    classify_foreground,
    frame_foreground_mask,
)
from .imaging import (
    BACKGROUND,
    EDGE,
    SENTINEL,
    RleBlock,
    as_frame,
    as_mask,
    as_sketch,
    binarize_sketch,
    check_same_shape,
    png_bytes,
    raster_from_png_bytes,
    rle_decode,
    rle_encode,
    sign_mask,
    to_luma,
)

MAGIC = b"MSV1"
VERSION = 1
FLAG_FULL_SKETCH = 0x01

_HEADER = struct.Struct("<4sHHHHBB")
_LEN = struct.Struct("<I")


# ---------------------------------------------------------------------------
# edge extraction


@dataclass(frozen=True)
class EdgeExtractorConfig:
    """Classical stand-in for a learned edge detector.

    ``operator`` is ``"gradient-magnitude"`` (single threshold at
    ``high_threshold``) or ``"hysteresis"`` (Canny-style double threshold).
    Thresholds apply to the raw 3x3 Sobel magnitude of the 8-bit luma, the
    same scale as the usual Canny thresholds.
    """

    operator: str = "hysteresis"
    low_threshold: float = 50.0
    high_threshold: float = 100.0
    blur_radius: float = 1.0

    def __post_init__(self):
        if self.operator not in ("gradient-magnitude", "hysteresis"):
            raise ValueError(f"unknown edge operator {self.operator!r}")
        if self.low_threshold > self.high_threshold:
            raise ValueError("low_threshold must not exceed high_threshold")
        if self.blur_radius < 0:
            raise ValueError("blur_radius must be non-negative")


def _non_maximum_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    # quantise gradient direction to 0/45/90/135 degrees
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = (((angle + 22.5) // 45.0) % 4).astype(np.int8)
    p = np.pad(mag, 1, mode="constant")
    h, w = mag.shape
    c = p[1:-1, 1:-1]
    neighbours = {
        0: (p[1:-1, :-2], p[1:-1, 2:]),   # horizontal gradient
        1: (p[:-2, :-2], p[2:, 2:]),      # 45 degrees (y down)
        2: (p[:-2, 1:-1], p[2:, 1:-1]),   # vertical gradient
        3: (p[:-2, 2:], p[2:, :-2]),      # 135 degrees
    }
    keep = np.zeros((h, w), dtype=bool)
    for s, (a, b) in neighbours.items():
        sel = sector == s
        keep |= sel & (c >= a) & (c >= b)
    return keep & (mag > 0)


def extract_sketch(frame, cfg: EdgeExtractorConfig = EdgeExtractorConfig()) -> np.ndarray:
    """Binary line drawing of a frame: 255 on edges, 0 elsewhere."""
    luma = to_luma(frame)
    if cfg.blur_radius > 0:
        luma = ndimage.gaussian_filter(luma, sigma=cfg.blur_radius, mode="nearest")
    gx = ndimage.sobel(luma, axis=1, mode="nearest")
    gy = ndimage.sobel(luma, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    thin = _non_maximum_suppression(mag, gx, gy)
    strong = thin & (mag >= cfg.high_threshold)
    if cfg.operator == "gradient-magnitude":
        edges = strong
    else:
        weak = thin & (mag >= cfg.low_threshold)
        labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
        if n:
            hit = np.zeros(n + 1, dtype=bool)
            hit[np.unique(labels[strong])] = True
            hit[0] = False
            edges = hit[labels]
        else:
            edges = strong
    return np.where(edges, EDGE, BACKGROUND).astype(np.uint8)


# ---------------------------------------------------------------------------
# per-frame codec math


def background_regions(m_t, m_1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split the frame into (current foreground, vacated first-frame foreground, rest).

    The three masks are disjoint and cover every pixel exactly once.
    """
    m_t, m_1 = as_mask(m_t), as_mask(m_1)
    check_same_shape(m_t, m_1)
    vacated = m_1 & ~(m_1 & m_t)
    rest = ~m_t & ~vacated
    return m_t, vacated, rest


def compose_static_background(s_t, s_1, s_T, m_t, m_1) -> np.ndarray:
    """Static-background sketch: current foreground from ``s_t``, the area the
    first-frame foreground has since left from ``s_T``, everything else from ``s_1``."""
    s_t, s_1, s_T = as_sketch(s_t), as_sketch(s_1), as_sketch(s_T)
    check_same_shape(s_t, s_1, s_T, np.asarray(m_t), np.asarray(m_1))
    current, vacated, rest = background_regions(m_t, m_1)
    out = (
        current.astype(np.int32) * s_t
        + rest.astype(np.int32) * s_1
        + vacated.astype(np.int32) * s_T
    )
    return out.astype(np.uint8)


def mask_sketch(s_t, m_t) -> np.ndarray:
    """Foreground-only sketch: edge 255, in-mask non-edge 1, outside 0."""
    s_t, m_t = as_sketch(s_t), as_mask(m_t)
    check_same_shape(s_t, m_t)
    return (m_t * np.maximum(s_t, SENTINEL)).astype(np.uint8)


def reconstruct_sketch(ms_t, s_1, s_T, ms_first) -> np.ndarray:
    """Rebuild a full ``{0, 255}`` sketch from a masked sketch and the keyframes.

    ``ms_first`` is the masked sketch of frame 1; its sign gives the
    first-frame foreground mask.
    """
    if ms_first is None:
        raise ProtocolError("the first masked frame is required to recover the first-frame mask")
    ms_t, s_1, s_T, ms_first = (as_sketch(a) for a in (ms_t, s_1, s_T, ms_first))
    check_same_shape(ms_t, s_1, s_T, ms_first)
    m_t = sign_mask(ms_t)
    m_1 = sign_mask(ms_first)
    _, vacated, rest = background_regions(m_t, m_1)
    composite = (
        ms_t.astype(np.int32)
        + rest.astype(np.int32) * s_1
        + vacated.astype(np.int32) * s_T
    )
    return binarize_sketch(composite)


# ---------------------------------------------------------------------------
# videos


def _stack(frames, validate) -> np.ndarray:
    arrays = [validate(f) for f in frames]
    if not arrays:
        raise ShapeError("a video needs at least one frame")
    check_same_shape(*arrays)
    return np.stack(arrays)


@dataclass(eq=False)
class SketchVideo:
    frames: np.ndarray  # (T, H, W) uint8
    fps: int = 15

    def __post_init__(self):
        self.frames = _stack(self.frames, as_sketch)
        if len(self.frames) < 2:
            raise ShapeError("a sketch video needs at least two frames")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def shape(self) -> tuple[int, int]:
        return self.frames.shape[1:]


@dataclass(eq=False)
class MaskedSketchVideo:
    """Everything the encoder transmits for one clip."""

    masked_frames: np.ndarray  # (T, H, W) uint8, values in {0, 1, 255}
    keyframe_first: np.ndarray  # s_1, values in {0, 255}
    keyframe_last: np.ndarray  # s_T, values in {0, 255}
    reference_frame: np.ndarray  # x_1, (H, W, 3)
    fps: int = 15

    def __post_init__(self):
        self.masked_frames = _stack(self.masked_frames, as_sketch)
        self.keyframe_first = as_sketch(self.keyframe_first)
        self.keyframe_last = as_sketch(self.keyframe_last)
        self.reference_frame = as_frame(self.reference_frame)
        check_same_shape(self.masked_frames[0], self.keyframe_first, self.keyframe_last, self.reference_frame)
        if len(self.masked_frames) < 2:
            raise ShapeError("a masked sketch video needs at least two frames")
        if not np.isin(self.masked_frames, (BACKGROUND, SENTINEL, EDGE)).all():
            raise ValueError("masked frames must only contain 0, 1 and 255")
        for key in (self.keyframe_first, self.keyframe_last):
            if not np.isin(key, (BACKGROUND, EDGE)).all():
                raise ValueError("keyframes must only contain 0 and 255")

    def __len__(self) -> int:
        return len(self.masked_frames)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MaskedSketchVideo):
            return NotImplemented
        return (
            self.fps == other.fps
            and np.array_equal(self.masked_frames, other.masked_frames)
            and np.array_equal(self.keyframe_first, other.keyframe_first)
            and np.array_equal(self.keyframe_last, other.keyframe_last)
            and np.array_equal(self.reference_frame, other.reference_frame)
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.masked_frames.shape[1:]

    def first_mask(self) -> np.ndarray:
        return sign_mask(self.masked_frames[0])

    def reconstruct(self, t: int) -> np.ndarray:
        """Full sketch of frame ``t`` (0-based)."""
        return reconstruct_sketch(
            self.masked_frames[t], self.keyframe_first, self.keyframe_last, self.masked_frames[0]
        )


@dataclass(frozen=True)
class EncoderConfig:
    edges: EdgeExtractorConfig = field(default_factory=EdgeExtractorConfig)
    iou_threshold: float = DEFAULT_IOU_THRESHOLD
    fps: int = 15


def extract_sketch_video(frames: Sequence[np.ndarray], cfg: EdgeExtractorConfig = EdgeExtractorConfig(), fps: int = 15) -> SketchVideo:
    return SketchVideo([extract_sketch(f, cfg) for f in frames], fps)


def foreground_masks(tracks: Sequence[InstanceTrack], frame_count: int, shape, threshold: float) -> np.ndarray:
    """Per-frame foreground masks, shape ``(T, H, W)``."""
    for track in tracks:
        if len(track) != frame_count:
            raise ShapeError(
                f"track {track.instance_id!r} spans {len(track)} frames, video has {frame_count}"
            )
    fg = classify_foreground(tracks, threshold, shape=tuple(shape))
    return np.stack([frame_foreground_mask(fg, t) for t in range(frame_count)])


def mask_sketch_video(sketches: SketchVideo, reference_frame, masks: np.ndarray) -> MaskedSketchVideo:
    masked = [mask_sketch(s, m) for s, m in zip(sketches.frames, masks)]
    return MaskedSketchVideo(masked, sketches.frames[0], sketches.frames[-1], reference_frame, sketches.fps)


def encode_video(frames: Sequence[np.ndarray], tracks: Sequence[InstanceTrack], cfg: EncoderConfig = EncoderConfig()) -> MaskedSketchVideo:
    """Run the whole encoder on a clip of at least two frames."""
    if len(frames) < 2:
        raise ShapeError("encoding needs at least two frames")
    sketches = extract_sketch_video(frames, cfg.edges, cfg.fps)
    masks = foreground_masks(tracks, len(frames), sketches.shape, cfg.iou_threshold)
    return mask_sketch_video(sketches, frames[0], masks)


# ---------------------------------------------------------------------------
# MSV1 container


def _write_container(shape, frame_count, fps, flags, reference, blocks: Sequence[np.ndarray]) -> bytes:
    h, w = shape
    if max(w, h, frame_count) > 0xFFFF:
        raise ValueError("width, height and frame count must fit in 16 bits")
    if not 0 < fps <= 0xFF:
        raise ValueError("fps must fit in 8 bits")
    parts = [_HEADER.pack(MAGIC, VERSION, w, h, frame_count, fps, flags)]
    for payload in [png_bytes(reference)] + [rle_encode(b).to_bytes() for b in blocks]:
        parts.append(_LEN.pack(len(payload)))
        parts.append(payload)
    return b"".join(parts)


def _read_container(stream: bytes):
    stream = bytes(stream)
    if len(stream) < 4 or stream[:4] != MAGIC:
        raise BadMagicError(f"not an MSV1 stream (magic {stream[:4]!r})")
    if len(stream) < _HEADER.size:
        raise TruncatedPayloadError("stream ends inside the header")
    _, version, w, h, count, fps, flags = _HEADER.unpack_from(stream)
    if version != VERSION:
        raise VersionMismatchError(f"unsupported MSV1 version {version}")
    pos = _HEADER.size
    payloads = []
    for _ in range(count + 3):
        if pos + _LEN.size > len(stream):
            raise TruncatedPayloadError("stream ends before a section length")
        (n,) = _LEN.unpack_from(stream, pos)
        pos += _LEN.size
        if pos + n > len(stream):
            raise TruncatedPayloadError("stream ends inside a section payload")
        payloads.append(stream[pos:pos + n])
        pos += n
    if pos != len(stream):
        raise CorruptPayloadError(f"{len(stream) - pos} trailing bytes after the last section")
    reference = raster_from_png_bytes(payloads[0])
    if reference.shape != (h, w, 3):
        raise CorruptPayloadError(f"reference frame is {reference.shape}, header says {(h, w, 3)}")
    rasters = [rle_decode(RleBlock.from_bytes(p), w, h) for p in payloads[1:]]
    return fps, flags, reference, rasters


def encode_container(video: MaskedSketchVideo) -> bytes:
    """Serialise a masked sketch video as an MSV1 byte stream."""
    return _write_container(
        video.shape, len(video), video.fps, 0, video.reference_frame,
        [video.keyframe_first, video.keyframe_last, *video.masked_frames],
    )


def decode_container(stream: bytes) -> MaskedSketchVideo:
    fps, flags, reference, rasters = _read_container(stream)
    if flags & FLAG_FULL_SKETCH:
        raise CorruptPayloadError("stream carries full sketches; use decode_sketch_container")
    try:
        return MaskedSketchVideo(rasters[2:], rasters[0], rasters[1], reference, fps)
    except ValueError as exc:
        raise CorruptPayloadError(str(exc)) from exc


def encode_sketch_container(video: SketchVideo, reference_frame) -> bytes:
    """Same layout as :func:`encode_container` but with full sketches per frame.

    Used as the uncompressed baseline when comparing sizes.
    """
    return _write_container(
        video.shape, len(video), video.fps, FLAG_FULL_SKETCH, as_frame(reference_frame),
        [video.frames[0], video.frames[-1], *video.frames],
    )


def decode_sketch_container(stream: bytes) -> tuple[SketchVideo, np.ndarray]:
    fps, flags, reference, rasters = _read_container(stream)
    if not flags & FLAG_FULL_SKETCH:
        raise CorruptPayloadError("stream carries masked sketches; use decode_container")
    return SketchVideo(rasters[2:], fps), reference
