"""Frame recurrence: warp the last output, translate the sketch, blend by occlusion."""
from __future__ import annotations

import logging
from typing import Callable, Optional

import numpy as np

from ..imaging import as_frame, check_same_shape
from ..sketch_codec import MaskedSketchVideo
from .config import DecoderConfig
from .flow import estimate_flow, warp
from .occlusion import predict_occlusion_mask
from .translation import translate_frame

logger = logging.getLogger(__name__)

FlowEstimator = Callable[[list, list, DecoderConfig], np.ndarray]
OcclusionEstimator = Callable[[list, list, np.ndarray, DecoderConfig], np.ndarray]
Translator = Callable[[np.ndarray, np.ndarray, DecoderConfig], np.ndarray]


def compose_frame(warped, generated, mask) -> np.ndarray:
    """``(1 - m) * warped + m * generated`` per channel, rounded half-to-even once."""
    warped, generated = as_frame(warped), as_frame(generated)
    mask = np.asarray(mask, dtype=np.float64)
    check_same_shape(warped, generated, mask)
    if mask.ndim != 2:
        raise ValueError(f"occlusion mask must be 2-D, got shape {mask.shape}")
    if mask.size and (mask.min() < 0.0 or mask.max() > 1.0):
        raise ValueError("occlusion mask values must lie in [0, 1]")
    m = mask[..., None]
    blend = (1.0 - m) * warped + m * generated
    return np.clip(np.rint(blend), 0, 255).astype(np.uint8)


def decode_video(
    video: MaskedSketchVideo,
    cfg: DecoderConfig = DecoderConfig(),
    *,
    flow_estimator: Optional[FlowEstimator] = None,
    occlusion_estimator: Optional[OcclusionEstimator] = None,
    translator: Optional[Translator] = None,
) -> list[np.ndarray]:
    """Reconstruct every frame of a masked sketch video.

    Frame 0 is the transmitted reference. Each later frame blends the
    previous output, warped by the estimated flow, with a frame translated
    from its reconstructed sketch. At most ``cfg.window`` past outputs are
    shown to the estimators; early frames see whatever history exists.

    The three keyword hooks replace the reference estimators and must share
    their signatures.
    """
    flow_estimator = flow_estimator or estimate_flow
    occlusion_estimator = occlusion_estimator or predict_occlusion_mask
    translator = translator or translate_frame

    reference = video.reference_frame
    sketches = [video.reconstruct(t) for t in range(len(video))]
    frames = [reference.copy()]
    for t in range(1, len(video)):
        start = max(0, t - cfg.window)
        history = frames[start:t]
        window = sketches[start:t + 1]
        flow = flow_estimator(history, window, cfg)
        warped = warp(frames[-1], flow, cfg.border_policy)
        mask = occlusion_estimator(history, window, flow, cfg)
        if not mask.any():
            # zero occlusion leaves the warped frame untouched
            frames.append(compose_frame(warped, warped, mask))
            continue
        generated = translator(sketches[t], reference, cfg)
        frames.append(compose_frame(warped, generated, mask))
        logger.debug("frame %d: occluded fraction %.4f", t, float(mask.mean()))
    return frames
