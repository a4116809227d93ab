"""Masked-sketch semantic coding of surveillance video.

The encoder reduces a clip to foreground-only sketches plus two keyframe
sketches and the first colour frame; the decoder rebuilds full sketches and
then colour frames by flow warping and exemplar-guided translation.
"""
from .decoder import DecoderConfig, decode_video
from .errors import (
    BadMagicError,
    CorruptPayloadError,
    ProtocolError,
    SemsketchError,
    ShapeError,
    TruncatedPayloadError,
    UndefinedIoUError,
    UnsupportedFormatError,
    VersionMismatchError,
)
from .foreground import InstanceTrack, classify_foreground, frame_foreground_mask, instance_iou
from .metrics import evaluate_video, psnr, size_report, ssim
from .sketch_codec import (
    EdgeExtractorConfig,
    EncoderConfig,
    MaskedSketchVideo,
    SketchVideo,
    compose_static_background,
    decode_container,
    encode_container,
    encode_video,
    extract_sketch,
    mask_sketch,
    reconstruct_sketch,
)

__version__ = "0.1.0"

__all__ = [
    "BadMagicError",
    "CorruptPayloadError",
    "DecoderConfig",
    "EdgeExtractorConfig",
    "EncoderConfig",
    "InstanceTrack",
    "MaskedSketchVideo",
    "ProtocolError",
    "SemsketchError",
    "ShapeError",
    "SketchVideo",
    "TruncatedPayloadError",
    "UndefinedIoUError",
    "UnsupportedFormatError",
    "VersionMismatchError",
    "classify_foreground",
    "compose_static_background",
    "decode_container",
    "decode_video",
    "encode_container",
    "encode_video",
    "evaluate_video",
    "extract_sketch",
    "frame_foreground_mask",
    "instance_iou",
    "mask_sketch",
    "psnr",
    "reconstruct_sketch",
    "size_report",
    "ssim",
]
