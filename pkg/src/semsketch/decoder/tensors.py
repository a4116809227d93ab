"""Raw tensor files for plugging precomputed or learned estimator outputs.

A tensor is stored as a flat little-endian float32 payload next to a JSON
sidecar (``<name>.json``) declaring its shape and role.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import CorruptPayloadError, ProtocolError
from .config import DecoderConfig


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def save_tensor(path, array, role: str) -> None:
    path = Path(path)
    array = np.asarray(array, dtype="<f4")
    path.write_bytes(array.tobytes())
    _sidecar(path).write_text(json.dumps({"shape": list(array.shape), "role": role, "dtype": "float32-le"}))


def load_tensor(path) -> tuple[np.ndarray, str]:
    path = Path(path)
    meta = json.loads(_sidecar(path).read_text())
    if meta.get("dtype", "float32-le") != "float32-le":
        raise CorruptPayloadError(f"unsupported tensor dtype {meta['dtype']!r}")
    raw = path.read_bytes()
    shape = tuple(meta["shape"])
    if len(raw) != 4 * int(np.prod(shape, dtype=np.int64)):
        raise CorruptPayloadError(f"{path} holds {len(raw)} bytes, sidecar declares shape {shape}")
    return np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64), meta["role"]


class PrecomputedFlow:
    """Flow estimator replaying a ``(T-1, H, W, 2)`` tensor of role ``"flow"``.

    Entry ``i`` is the flow used to produce frame ``i + 1``.
    """

    def __init__(self, path):
        self.flows, role = load_tensor(path)
        if role != "flow" or self.flows.ndim != 4 or self.flows.shape[-1] != 2:
            raise CorruptPayloadError(f"{path} is not a flow tensor (role {role!r}, shape {self.flows.shape})")
        self._next = 0

    def __call__(self, prev_frames, sketches, cfg: DecoderConfig) -> np.ndarray:
        if self._next >= len(self.flows):
            raise ProtocolError("precomputed flow tensor exhausted")
        flow = self.flows[self._next]
        self._next += 1
        return flow


class PrecomputedOcclusion:
    """Occlusion estimator replaying a ``(T-1, H, W)`` tensor of role ``"occlusion"``."""

    def __init__(self, path):
        self.masks, role = load_tensor(path)
        if role != "occlusion" or self.masks.ndim != 3:
            raise CorruptPayloadError(f"{path} is not an occlusion tensor (role {role!r}, shape {self.masks.shape})")
        self.masks = np.clip(self.masks, 0.0, 1.0)
        self._next = 0

    def __call__(self, prev_frames, sketches, flow, cfg: DecoderConfig) -> np.ndarray:
        if self._next >= len(self.masks):
            raise ProtocolError("precomputed occlusion tensor exhausted")
        mask = self.masks[self._next]
        self._next += 1
        return mask
