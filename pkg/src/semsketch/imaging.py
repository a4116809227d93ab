"""Pixel-level foundations: raster validation, mask algebra, RLE and PNG I/O.

Rasters are plain numpy arrays:

* frames are ``uint8`` arrays of shape ``(H, W, 3)``,
* sketches are ``uint8`` arrays of shape ``(H, W)``,
* masks are ``bool`` arrays of shape ``(H, W)``.

Sketch samples use a three-symbol alphabet: ``EDGE`` (255) for a line
pixel, ``BACKGROUND`` (0) for everything else, and ``SENTINEL`` (1) for an
in-mask pixel without an edge in a masked sketch.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import CorruptPayloadError, ShapeError, UnsupportedFormatError

BACKGROUND = 0
SENTINEL = 1
EDGE = 255

_RUN_DTYPE = np.dtype([("length", "<u4"), ("value", "u1")])


def as_frame(frame) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3 or frame.shape[0] < 1 or frame.shape[1] < 1:
        raise ShapeError(f"expected an (H, W, 3) frame, got shape {frame.shape}")
    if frame.dtype != np.uint8:
        raise ShapeError(f"frames must be uint8, got {frame.dtype}")
    return frame


def as_sketch(sketch) -> np.ndarray:
    sketch = np.asarray(sketch)
    if sketch.ndim != 2 or sketch.shape[0] < 1 or sketch.shape[1] < 1:
        raise ShapeError(f"expected an (H, W) sketch, got shape {sketch.shape}")
    if sketch.dtype != np.uint8:
        raise ShapeError(f"sketches must be uint8, got {sketch.dtype}")
    return sketch


def as_mask(mask) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ShapeError(f"expected an (H, W) mask, got shape {mask.shape}")
    if mask.dtype != bool:
        if mask.size and not np.isin(mask, (0, 1)).all():
            raise ValueError("mask values must be 0 or 1")
        mask = mask.astype(bool)
    return mask


def check_same_shape(*arrays: np.ndarray) -> None:
    """Raise ``ShapeError`` unless all arrays share the same (H, W)."""
    shapes = {a.shape[:2] for a in arrays}
    if len(shapes) > 1:
        raise ShapeError(f"dimension mismatch: {sorted(shapes)}")


def mask_union(a, b) -> np.ndarray:
    a, b = as_mask(a), as_mask(b)
    check_same_shape(a, b)
    return a | b


def mask_intersection(a, b) -> np.ndarray:
    a, b = as_mask(a), as_mask(b)
    check_same_shape(a, b)
    return a & b


def mask_difference(a, b) -> np.ndarray:
    """Set difference ``a \\ b``."""
    a, b = as_mask(a), as_mask(b)
    check_same_shape(a, b)
    return a & ~b


def sign_mask(masked_sketch) -> np.ndarray:
    """Recover a foreground mask as the sign of a masked sketch."""
    return np.asarray(masked_sketch) > 0


def binarize_sketch(raster, threshold: int = 128) -> np.ndarray:
    """Collapse any 8-bit raster onto the ``{0, 255}`` sketch alphabet."""
    raster = np.asarray(raster)
    return np.where(raster >= threshold, EDGE, BACKGROUND).astype(np.uint8)


def to_luma(frame) -> np.ndarray:
    """Rec. 601 luma of an RGB frame as float64; 2-D input passes through."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim == 2:
        return frame
    return frame[..., 0] * 0.299 + frame[..., 1] * 0.587 + frame[..., 2] * 0.114


# ---------------------------------------------------------------------------
# run-length coding


@dataclass(frozen=True, eq=False)
class RleBlock:
    """Canonical run-length form of a flattened row-major raster."""

    lengths: np.ndarray  # uint32
    values: np.ndarray  # uint8

    def __len__(self) -> int:
        return len(self.lengths)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RleBlock):
            return NotImplemented
        return np.array_equal(self.lengths, other.lengths) and np.array_equal(self.values, other.values)

    @property
    def runs(self) -> list[tuple[int, int]]:
        return [(int(n), int(v)) for n, v in zip(self.lengths, self.values)]

    @property
    def total(self) -> int:
        return int(self.lengths.sum(dtype=np.uint64))

    def to_bytes(self) -> bytes:
        """Little-endian wire form: ``(u32 run_length, u8 value)`` per run."""
        packed = np.empty(len(self), dtype=_RUN_DTYPE)
        packed["length"] = self.lengths
        packed["value"] = self.values
        return packed.tobytes()

    @classmethod
    def from_bytes(cls, payload: bytes) -> "RleBlock":
        if len(payload) % _RUN_DTYPE.itemsize:
            raise CorruptPayloadError(
                f"RLE payload of {len(payload)} bytes is not a whole number of runs"
            )
        packed = np.frombuffer(payload, dtype=_RUN_DTYPE)
        return cls(packed["length"].astype(np.uint32), packed["value"].astype(np.uint8))


def rle_encode(raster) -> RleBlock:
    """Encode a 2-D 8-bit (or boolean) raster in canonical run-length form."""
    flat = np.asarray(raster).astype(np.uint8, copy=False).ravel()
    if flat.size == 0:
        raise ShapeError("cannot run-length encode an empty raster")
    starts = np.concatenate(([0], np.flatnonzero(flat[1:] != flat[:-1]) + 1))
    lengths = np.diff(np.append(starts, flat.size)).astype(np.uint32)
    return RleBlock(lengths, flat[starts].copy())


def rle_decode(block: RleBlock, width: int, height: int) -> np.ndarray:
    """Expand ``block`` into an ``(height, width)`` uint8 raster."""
    if np.any(block.lengths == 0):
        raise CorruptPayloadError("RLE block contains a zero-length run")
    if block.total != width * height:
        raise CorruptPayloadError(
            f"RLE runs cover {block.total} pixels, expected {width}x{height}={width * height}"
        )
    return np.repeat(block.values, block.lengths).reshape(height, width)


# ---------------------------------------------------------------------------
# image files

_ACCEPTED_MODES = {"L", "RGB", "1", "P"}


def _from_pil(image: Image.Image) -> np.ndarray:
    if image.mode not in _ACCEPTED_MODES:
        raise UnsupportedFormatError(
            f"unsupported image mode {image.mode!r}; only 8-bit grayscale or RGB is accepted"
        )
    if image.mode == "1":
        image = image.convert("L")
    elif image.mode == "P":
        image = image.convert("RGB")
    return np.array(image, dtype=np.uint8)


def _to_pil(raster) -> Image.Image:
    raster = np.asarray(raster)
    if raster.dtype == bool:
        raster = raster.astype(np.uint8) * 255
    if raster.dtype != np.uint8:
        raise UnsupportedFormatError(f"only 8-bit rasters can be saved, got {raster.dtype}")
    if raster.ndim == 2:
        return Image.fromarray(raster)
    if raster.ndim == 3 and raster.shape[2] == 3:
        return Image.fromarray(raster)
    raise ShapeError(f"cannot save raster of shape {raster.shape}")


def load_image(path) -> np.ndarray:
    """Load a PNG as ``(H, W)`` grayscale or ``(H, W, 3)`` RGB uint8."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such image: {path}")
    with Image.open(path) as image:
        image.load()
        return _from_pil(image)


def load_mask(path) -> np.ndarray:
    """Load a mask PNG (black = 0, white = 1)."""
    raster = load_image(path)
    if raster.ndim == 3:
        raster = raster.max(axis=2)
    return raster > 127


def save_image(path, raster) -> None:
    """Write a raster losslessly as PNG. Boolean masks become 0/255."""
    _to_pil(raster).save(os.fspath(path), format="PNG", compress_level=6, optimize=False)


def png_bytes(raster) -> bytes:
    buf = io.BytesIO()
    _to_pil(raster).save(buf, format="PNG", compress_level=6, optimize=False)
    return buf.getvalue()


def raster_from_png_bytes(payload: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(payload)) as image:
            image.load()
            return _from_pil(image)
    except (OSError, SyntaxError) as exc:
        raise CorruptPayloadError(f"embedded image payload is unreadable: {exc}") from exc
