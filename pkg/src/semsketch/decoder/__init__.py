from .config import DecoderConfig
from .core import compose_frame, decode_video
from .flow import block_matching_flow, estimate_flow, warp, zero_flow
from .occlusion import dilate, predict_occlusion_mask
from .tensors import PrecomputedFlow, PrecomputedOcclusion, load_tensor, save_tensor
from .translation import (
    StyleVector,
    adain,
    align_features,
    attention_correlation,
    attention_weights,
    colour_features,
    extract_features,
    translate_frame,
)

__all__ = [
    "DecoderConfig", "compose_frame", "decode_video", "block_matching_flow", "estimate_flow",
    "warp", "zero_flow", "dilate", "predict_occlusion_mask", "PrecomputedFlow",
    "PrecomputedOcclusion", "load_tensor", "save_tensor", "StyleVector", "adain",
    "align_features", "attention_correlation", "attention_weights", "colour_features",
    "extract_features", "translate_frame",
]
