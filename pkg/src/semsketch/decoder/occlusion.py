from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import ndimage

from ..errors import ProtocolError, ShapeError
from .config import DecoderConfig
from .flow import warp


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary dilation with a ``(2r+1)`` square."""
    if radius == 0:
        return mask.copy()
    return ndimage.binary_dilation(mask, structure=np.ones((2 * radius + 1,) * 2, dtype=bool))


def predict_occlusion_mask(prev_frames: Sequence[np.ndarray], sketches: Sequence[np.ndarray], flow, cfg: DecoderConfig = DecoderConfig()) -> np.ndarray:
    """Soft occlusion mask in ``[0, 1]``: 1 where fresh content must be generated.

    The sketch-disagreement estimator warps the previous sketch with ``flow``
    and marks, after dilation, every pixel where it disagrees with the
    current sketch.
    """
    if len(sketches) == 0:
        raise ProtocolError("occlusion estimation needs the current sketch")
    current = np.asarray(sketches[-1])
    if np.shape(flow)[:2] != current.shape:
        raise ShapeError(f"flow {np.shape(flow)} does not match sketch {current.shape}")
    if cfg.occlusion_estimator == "constant-one":
        return np.ones(current.shape, dtype=np.float64)
    if len(sketches) < 2:
        raise ProtocolError("sketch disagreement needs the previous and the current sketch")
    previous = np.asarray(sketches[-2])
    if previous.shape != current.shape:
        raise ShapeError(f"dimension mismatch: {previous.shape} vs {current.shape}")
    warped = warp(previous, flow, cfg.border_policy) >= 128
    disagree = warped != (current >= 128)
    return dilate(disagree, cfg.dilation_radius).astype(np.float64)
