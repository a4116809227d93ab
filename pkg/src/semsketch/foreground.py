"""Foreground selection from instance tracks by temporal IoU."""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ShapeError, UndefinedIoUError
from .imaging import as_mask, load_mask

logger = logging.getLogger(__name__)

DEFAULT_IOU_THRESHOLD = 0.8

_TRACK_DIR = re.compile(r"^track_(.+)$")
_FRAME_FILE = re.compile(r"^frame_(\d+)\.png$")


@dataclass
class InstanceTrack:
    """Per-frame masks of one segmented instance.

    ``None`` entries stand for frames where the segmenter lost the instance;
    they behave as empty masks.
    """

    instance_id: str
    masks: list[Optional[np.ndarray]]

    def __post_init__(self):
        shapes = {np.shape(m) for m in self.masks if m is not None}
        if len(shapes) > 1:
            raise ShapeError(f"track {self.instance_id!r} mixes mask shapes {sorted(shapes)}")
        self.masks = [None if m is None else as_mask(m) for m in self.masks]

    def __len__(self) -> int:
        return len(self.masks)

    @property
    def shape(self) -> Optional[tuple[int, int]]:
        for m in self.masks:
            if m is not None:
                return m.shape
        return None

    def mask_at(self, t: int) -> np.ndarray:
        m = self.masks[t]
        if m is None:
            return np.zeros(self.shape, dtype=bool)
        return m


@dataclass
class ForegroundSet:
    tracks: list[InstanceTrack]
    threshold: float
    shape: Optional[tuple[int, int]] = None
    excluded: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tracks)


def instance_iou(track: InstanceTrack) -> float:
    """|intersection over all frames| / |union over all frames|."""
    if len(track) == 0 or track.shape is None:
        raise UndefinedIoUError(f"track {track.instance_id!r} has no masks")
    # a dropped frame is an empty mask, so the intersection vanishes
    if any(m is None for m in track.masks):
        inter = 0
    else:
        inter = int(np.logical_and.reduce(track.masks).sum())
    present = [m for m in track.masks if m is not None]
    union = int(np.logical_or.reduce(present).sum())
    if union == 0:
        raise UndefinedIoUError(f"track {track.instance_id!r} is empty in every frame")
    return inter / union


def classify_foreground(
    tracks: Sequence[InstanceTrack],
    threshold: float = DEFAULT_IOU_THRESHOLD,
    shape: Optional[tuple[int, int]] = None,
) -> ForegroundSet:
    """Keep the tracks whose IoU is strictly below ``threshold``.

    Tracks with an undefined IoU are skipped and listed in
    ``ForegroundSet.excluded``.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"IoU threshold must lie in (0, 1], got {threshold}")
    kept, excluded = [], []
    for track in tracks:
        if shape is None:
            shape = track.shape
        try:
            iou = instance_iou(track)
        except UndefinedIoUError as exc:
            logger.warning("excluding track: %s", exc)
            excluded.append(track.instance_id)
            continue
        logger.debug("track %s IoU=%.4f", track.instance_id, iou)
        if iou < threshold:
            kept.append(track)
    return ForegroundSet(kept, threshold, shape, excluded)


def frame_foreground_mask(fg: ForegroundSet, t: int) -> np.ndarray:
    """Union of every foreground track's mask at frame ``t`` (0-based)."""
    if fg.shape is None:
        raise ValueError("foreground set carries no frame shape; pass shape= to classify_foreground")
    out = np.zeros(fg.shape, dtype=bool)
    for track in fg.tracks:
        if not 0 <= t < len(track):
            raise IndexError(f"frame {t} outside track {track.instance_id!r} of length {len(track)}")
        out |= track.mask_at(t)
    return out


# ---------------------------------------------------------------------------
# ingestion


def load_tracks_dir(mask_dir, frame_count: int) -> list[InstanceTrack]:
    """Read ``track_<id>/frame_<t>.png`` files (``t`` starting at 1).

    Missing frame files become ``None`` masks.
    """
    mask_dir = Path(mask_dir)
    if not mask_dir.is_dir():
        raise FileNotFoundError(f"mask directory not found: {mask_dir}")
    tracks = []
    for sub in sorted(p for p in mask_dir.iterdir() if p.is_dir()):
        m = _TRACK_DIR.match(sub.name)
        if not m:
            continue
        masks: list[Optional[np.ndarray]] = [None] * frame_count
        for f in sub.iterdir():
            fm = _FRAME_FILE.match(f.name)
            if fm and 1 <= int(fm.group(1)) <= frame_count:
                masks[int(fm.group(1)) - 1] = load_mask(f)
        tracks.append(InstanceTrack(m.group(1), masks))
    return tracks


def load_tracks_manifest(path) -> list[InstanceTrack]:
    """Read a JSON manifest ``{"tracks": {id: [path-or-null, ...]}}``.

    Relative paths resolve against the manifest's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"mask manifest not found: {path}")
    doc = json.loads(path.read_text())
    tracks = []
    for track_id, entries in doc["tracks"].items():
        masks = [None if e is None else load_mask(path.parent / e) for e in entries]
        tracks.append(InstanceTrack(str(track_id), masks))
    return tracks
