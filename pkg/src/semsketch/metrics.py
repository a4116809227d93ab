"""Full-reference quality metrics and the container-size comparison."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeError
from .imaging import png_bytes, sign_mask, to_luma
from .sketch_codec import MaskedSketchVideo, SketchVideo, encode_container, encode_sketch_container

PSNR_CAP = 99.0
UNAVAILABLE = "unavailable"


@dataclass(frozen=True)
class SSIMConfig:
    window: int = 8
    k1: float = 0.01
    k2: float = 0.03
    data_range: float = 255.0

    @property
    def c1(self) -> float:
        return (self.k1 * self.data_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.data_range) ** 2


def psnr(a, b) -> float:
    """PSNR in dB over all samples, capped at 99 dB."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    mse = np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2)
    if mse == 0:
        return PSNR_CAP
    return float(min(PSNR_CAP, 10.0 * np.log10(255.0 ** 2 / mse)))


def ssim(a, b, cfg: SSIMConfig = SSIMConfig()) -> float:
    """Mean SSIM over every ``window x window`` patch (stride 1) of the luma plane.

    Local statistics use a uniform window and population (co)variances.
    """
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    la, lb = to_luma(a), to_luma(b)
    if la.shape[0] < cfg.window or la.shape[1] < cfg.window:
        raise ShapeError(f"frame {la.shape} is smaller than the {cfg.window}x{cfg.window} window")
    wa = sliding_window_view(la, (cfg.window, cfg.window))
    wb = sliding_window_view(lb, (cfg.window, cfg.window))
    mu_a = wa.mean(axis=(-2, -1))
    mu_b = wb.mean(axis=(-2, -1))
    da = wa - mu_a[..., None, None]
    db = wb - mu_b[..., None, None]
    var_a = (da * da).mean(axis=(-2, -1))
    var_b = (db * db).mean(axis=(-2, -1))
    cov = (da * db).mean(axis=(-2, -1))
    num = (2 * mu_a * mu_b + cfg.c1) * (2 * cov + cfg.c2)
    den = (mu_a ** 2 + mu_b ** 2 + cfg.c1) * (var_a + var_b + cfg.c2)
    return float(np.mean(num / den))


@dataclass
class QualityReport:
    psnr: list[float]
    ssim: list[float]
    mean_psnr: float
    mean_ssim: float
    frame_count: int
    # perceptual metrics need pretrained networks and are not computed
    kid: str = UNAVAILABLE
    lpips: str = UNAVAILABLE

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_video(original: Sequence[np.ndarray], decoded: Sequence[np.ndarray], cfg: SSIMConfig = SSIMConfig()) -> QualityReport:
    if len(original) != len(decoded):
        raise ShapeError(f"frame count mismatch: {len(original)} vs {len(decoded)}")
    if not original:
        raise ShapeError("cannot evaluate an empty video")
    p = [psnr(a, b) for a, b in zip(original, decoded)]
    s = [ssim(a, b, cfg) for a, b in zip(original, decoded)]
    return QualityReport(p, s, float(np.mean(p)), float(np.mean(s)), len(p))


@dataclass
class SizeReport:
    raw_size: int
    sketch_size: int
    masked_size: int
    masked_to_sketch: float = field(init=False)
    masked_to_raw: float = field(init=False)
    max_foreground_fraction: float = 0.0

    def __post_init__(self):
        self.masked_to_sketch = self.masked_size / self.sketch_size
        self.masked_to_raw = self.masked_size / self.raw_size

    def to_dict(self) -> dict:
        return asdict(self)


def foreground_fraction(masked: MaskedSketchVideo) -> np.ndarray:
    """Per-frame share of pixels inside the transmitted foreground mask."""
    return np.array([sign_mask(f).mean() for f in masked.masked_frames])


def size_report(raw: Sequence[np.ndarray], sketch: SketchVideo, masked: MaskedSketchVideo) -> SizeReport:
    """Byte sizes of the three representations of one clip.

    Raw frames are counted as individual PNGs; full and masked sketches are
    serialised as MSV1 containers carrying the same side information.
    """
    raw_size = sum(len(png_bytes(f)) for f in raw)
    sketch_size = len(encode_sketch_container(sketch, masked.reference_frame))
    masked_size = len(encode_container(masked))
    return SizeReport(raw_size, sketch_size, masked_size, float(foreground_fraction(masked).max()))


def write_report(path, record: dict) -> None:
    """Write a report record as sorted, indented JSON (byte-stable across runs)."""
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
