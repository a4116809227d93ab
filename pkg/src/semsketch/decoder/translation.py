"""Exemplar-guided sketch-to-frame translation with fixed filters.

Features are ``(C, h, w)`` float arrays. The pipeline correlates sketch
features against reference features, uses the correlation as attention over
the reference colours, upsamples the aligned colours, re-normalises them to
the reference's global colour statistics and finally draws the sketch lines
on top.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from ..errors import ShapeError
from ..imaging import check_same_shape, to_luma
from .config import DecoderConfig

FEATURE_CHANNELS = ("intensity", "grad_x", "grad_y", "blur_1", "blur_2")


def block_mean(image: np.ndarray, scale: int) -> np.ndarray:
    """Average-pool the leading two axes by ``scale`` (edge-padded)."""
    if scale == 1:
        return image.astype(np.float64)
    h, w = image.shape[:2]
    ph, pw = -h % scale, -w % scale
    pad = ((0, ph), (0, pw)) + ((0, 0),) * (image.ndim - 2)
    padded = np.pad(image.astype(np.float64), pad, mode="edge")
    H, W = padded.shape[:2]
    return padded.reshape(H // scale, scale, W // scale, scale, *image.shape[2:]).mean(axis=(1, 3))


def extract_features(image, cfg: DecoderConfig = DecoderConfig()) -> np.ndarray:
    """Fixed 5-channel filter bank on luma, pooled by ``cfg.feature_scale``.

    Channels: intensity, horizontal and vertical Sobel gradients, and
    Gaussian blurs at sigma 1 and 2.
    """
    luma = to_luma(image)
    gx = ndimage.sobel(luma, axis=1, mode="nearest") / 4.0
    gy = ndimage.sobel(luma, axis=0, mode="nearest") / 4.0
    b1 = ndimage.gaussian_filter(luma, 1.0, mode="nearest")
    b2 = ndimage.gaussian_filter(luma, 2.0, mode="nearest")
    stack = np.stack([luma, gx, gy, b1, b2], axis=-1)
    return np.moveaxis(block_mean(stack, cfg.feature_scale), -1, 0)


def colour_features(image, scale: int) -> np.ndarray:
    """Pooled RGB values as a ``(3, h, w)`` feature map."""
    image = np.asarray(image)
    return np.moveaxis(block_mean(image, scale), -1, 0)


def _positions(features: np.ndarray) -> np.ndarray:
    f = np.asarray(features, dtype=np.float64)
    return f.reshape(f.shape[0], -1).T


def attention_correlation(query, key) -> np.ndarray:
    """Centred cosine similarity between every query and key position.

    Each position's channel vector is centred on its own channel mean.
    Entry ``(u, v)`` is ``<q~_u, k~_v> / (|q~_u| |k~_v|)``; positions whose
    centred vector vanishes correlate 0 with everything.
    """
    query, key = np.asarray(query), np.asarray(key)
    if query.shape[0] != key.shape[0]:
        raise ShapeError(f"channel mismatch: {query.shape[0]} vs {key.shape[0]}")
    q = _positions(query)
    k = _positions(key)
    q = q - q.mean(axis=1, keepdims=True)
    k = k - k.mean(axis=1, keepdims=True)
    qn = np.linalg.norm(q, axis=1)
    kn = np.linalg.norm(k, axis=1)
    q_ok = qn > 1e-9 * (1.0 + np.abs(_positions(query)).max(axis=1))
    k_ok = kn > 1e-9 * (1.0 + np.abs(_positions(key)).max(axis=1))
    q = np.where(q_ok[:, None], q / np.where(q_ok, qn, 1.0)[:, None], 0.0)
    k = np.where(k_ok[:, None], k / np.where(k_ok, kn, 1.0)[:, None], 0.0)
    return np.clip(q @ k.T, -1.0, 1.0)


def attention_weights(correlation, alpha: float) -> np.ndarray:
    """Row-wise ``softmax(alpha * relu(correlation))``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    logits = alpha * np.maximum(np.asarray(correlation, dtype=np.float64), 0.0)
    logits -= logits.max(axis=1, keepdims=True)
    weights = np.exp(logits)
    weights /= weights.sum(axis=1, keepdims=True)
    return weights


def align_features(correlation, value, alpha: float, query_shape: Optional[tuple[int, int]] = None) -> np.ndarray:
    """Attention-weighted average of ``value`` positions for every query.

    Returns a ``(C, h, w)`` map laid out on ``query_shape`` (defaults to the
    value's own spatial shape).
    """
    correlation = np.asarray(correlation)
    value = np.asarray(value, dtype=np.float64)
    v = _positions(value)
    if correlation.shape[1] != v.shape[0]:
        raise ShapeError(f"attention has {correlation.shape[1]} columns, value has {v.shape[0]} positions")
    if query_shape is None:
        query_shape = value.shape[1:]
    if correlation.shape[0] != query_shape[0] * query_shape[1]:
        raise ShapeError(f"attention has {correlation.shape[0]} rows, query shape is {query_shape}")
    aligned = attention_weights(correlation, alpha) @ v
    return aligned.T.reshape(value.shape[0], *query_shape)


@dataclass(frozen=True)
class StyleVector:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def from_features(cls, features) -> "StyleVector":
        f = _positions(features)
        return cls(f.mean(axis=0), f.std(axis=0))


def adain(content, style: StyleVector, eps: float = 1e-8) -> np.ndarray:
    """Re-normalise each content channel to the style's mean and std (population)."""
    content = np.asarray(content, dtype=np.float64)
    mean = np.asarray(style.mean, dtype=np.float64)
    std = np.asarray(style.std, dtype=np.float64)
    if mean.shape != (content.shape[0],) or std.shape != mean.shape:
        raise ShapeError(f"style has {mean.shape} channels, content has {content.shape[0]}")
    axes = tuple(range(1, content.ndim))
    mu = content.mean(axis=axes, keepdims=True)
    sigma = content.std(axis=axes, keepdims=True)
    # flat channels carry no structure: they collapse onto the style mean
    normalised = np.where(sigma > eps, (content - mu) / np.where(sigma > eps, sigma, 1.0), 0.0)
    shape = (-1,) + (1,) * (content.ndim - 1)
    return normalised * std.reshape(shape) + mean.reshape(shape)


def upsample(features: np.ndarray, shape: tuple[int, int], scale: int) -> np.ndarray:
    """Bilinear upsampling of a ``(C, h, w)`` map to ``(C, H, W)``, pixel-centre aligned."""
    H, W = shape
    ys = np.clip((np.arange(H) + 0.5) / scale - 0.5, 0, features.shape[1] - 1)
    xs = np.clip((np.arange(W) + 0.5) / scale - 0.5, 0, features.shape[2] - 1)
    grid = np.meshgrid(ys, xs, indexing="ij")
    return np.stack([ndimage.map_coordinates(c, grid, order=1, mode="nearest") for c in features])


def clip_preserving_mean(image: np.ndarray, mean: np.ndarray, iterations: int = 8) -> np.ndarray:
    """Clip an ``(H, W, C)`` float image to ``[0, 255]`` while keeping per-channel means.

    Each pass shifts a channel by the mean lost to clipping and clips again.
    """
    out = np.clip(image, 0.0, 255.0)
    for _ in range(iterations):
        shift = mean - out.reshape(-1, out.shape[-1]).mean(axis=0)
        if np.all(np.abs(shift) < 1e-3):
            break
        out = np.clip(out + shift, 0.0, 255.0)
    return out


def translate_frame(sketch, reference, cfg: DecoderConfig = DecoderConfig()) -> np.ndarray:
    """Generate a colour frame with the structure of ``sketch`` and the look of ``reference``."""
    sketch = np.asarray(sketch)
    reference = np.asarray(reference)
    check_same_shape(sketch, reference)
    shape = sketch.shape[:2]
    s = cfg.feature_scale

    sketch_feats = extract_features(sketch, cfg)
    ref_feats = extract_features(reference, cfg)
    ref_colour = colour_features(reference, s)
    corr = attention_correlation(sketch_feats, ref_feats)
    aligned = align_features(corr, ref_colour, cfg.alpha, query_shape=sketch_feats.shape[1:])

    style = StyleVector.from_features(np.moveaxis(reference.astype(np.float64), -1, 0))
    out = adain(upsample(aligned, shape, s), style)
    out = clip_preserving_mean(np.moveaxis(out, 0, -1), style.mean)

    edges = sketch >= 128
    out[edges] *= 1.0 - cfg.edge_darkening
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)
