"""Seeded synthetic surveillance clips: a static textured scene plus moving shapes.

Every clip comes with exact per-instance ground-truth masks, so the
generator doubles as the oracle for foreground and codec tests.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .foreground import InstanceTrack
from .imaging import load_image, save_image

FRAME_PATTERN = "frame_{:04d}.png"


@dataclass
class SyntheticVideo:
    frames: list[np.ndarray]
    tracks: list[InstanceTrack]
    fps: int = 15


def textured_background(rng: np.random.Generator, height: int, width: int, n_patches: int = 24) -> np.ndarray:
    """Piecewise-constant scene of overlapping coloured rectangles."""
    img = np.empty((height, width, 3), dtype=np.uint8)
    img[:] = rng.integers(40, 216, size=3, dtype=np.uint8)
    for _ in range(n_patches):
        h = int(rng.integers(height // 8, height // 2))
        w = int(rng.integers(width // 10, width // 3))
        y = int(rng.integers(0, height - h))
        x = int(rng.integers(0, width - w))
        img[y:y + h, x:x + w] = rng.integers(0, 256, size=3, dtype=np.uint8)
    return img


def _shape_mask(kind: str, cy: float, cx: float, size_y: int, size_x: int, height: int, width: int) -> np.ndarray:
    ys, xs = np.mgrid[0:height, 0:width]
    top, left = int(round(cy)) - size_y // 2, int(round(cx)) - size_x // 2
    if kind == "rect":
        return (ys >= top) & (ys < top + size_y) & (xs >= left) & (xs < left + size_x)
    ry, rx = size_y / 2.0, size_x / 2.0
    return ((ys + 0.5 - top - ry) / ry) ** 2 + ((xs + 0.5 - left - rx) / rx) ** 2 <= 1.0


def generate_video(
    rng: np.random.Generator,
    width: int = 256,
    height: int = 128,
    frames: int = 16,
    n_movers: int = 2,
    n_static: int = 0,
    fps: int = 15,
) -> SyntheticVideo:
    """One clip with ``n_movers`` moving shapes and ``n_static`` fixed ones.

    Movers bounce off the frame border at 1.5 to 4 px per frame, so their
    temporal IoU is low; static shapes have IoU 1.
    """
    background = textured_background(rng, height, width)
    objects = []
    for i in range(n_movers + n_static):
        sy = int(rng.integers(12, 25))
        sx = int(rng.integers(12, 29))
        cy = float(rng.uniform(sy, height - sy))
        cx = float(rng.uniform(sx, width - sx))
        if i < n_movers:
            speed = rng.uniform(1.5, 4.0)
            angle = rng.uniform(0, 2 * np.pi)
            vy, vx = speed * np.sin(angle), speed * np.cos(angle)
        else:
            vy = vx = 0.0
        kind = "rect" if rng.random() < 0.5 else "ellipse"
        colour = rng.integers(0, 256, size=3, dtype=np.uint8)
        objects.append([kind, cy, cx, vy, vx, sy, sx, colour])

    video, masks = [], [[] for _ in objects]
    for _ in range(frames):
        img = background.copy()
        for k, obj in enumerate(objects):
            kind, cy, cx, vy, vx, sy, sx, colour = obj
            m = _shape_mask(kind, cy, cx, sy, sx, height, width)
            img[m] = colour
            masks[k].append(m)
            # bounce inside the frame
            cy, cx = cy + vy, cx + vx
            if not sy / 2 <= cy <= height - sy / 2:
                vy = -vy
                cy = float(np.clip(cy, sy / 2, height - sy / 2))
            if not sx / 2 <= cx <= width - sx / 2:
                vx = -vx
                cx = float(np.clip(cx, sx / 2, width - sx / 2))
            obj[1:5] = cy, cx, vy, vx
        video.append(img)
    tracks = [InstanceTrack(str(k), m) for k, m in enumerate(masks)]
    return SyntheticVideo(video, tracks, fps)


def write_video(root, video: SyntheticVideo) -> Path:
    root = Path(root)
    (root / "frames").mkdir(parents=True, exist_ok=True)
    for t, frame in enumerate(video.frames, start=1):
        save_image(root / "frames" / FRAME_PATTERN.format(t), frame)
    for track in video.tracks:
        tdir = root / "masks" / f"track_{track.instance_id}"
        tdir.mkdir(parents=True, exist_ok=True)
        for t, m in enumerate(track.masks, start=1):
            save_image(tdir / FRAME_PATTERN.format(t), m)
    (root / "masks").mkdir(exist_ok=True)
    return root


def write_corpus(
    out,
    seed: int = 0,
    n_videos: int = 8,
    n_movers: int = 2,
    n_static: int = 0,
    width: int = 256,
    height: int = 128,
    frames: int = 16,
    fps: int = 15,
) -> list[Path]:
    """Write ``video_<k>/frames`` and ``video_<k>/masks`` directories plus ``corpus.json``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    children = np.random.SeedSequence(seed).spawn(n_videos)
    paths = []
    for k, child in enumerate(children):
        video = generate_video(np.random.default_rng(child), width, height, frames, n_movers, n_static, fps)
        paths.append(write_video(out / f"video_{k}", video))
    meta = {
        "seed": seed, "videos": [p.name for p in paths], "fps": fps, "frames": frames,
        "width": width, "height": height, "movers": n_movers, "static": n_static,
    }
    (out / "corpus.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return paths


def load_frames(frame_dir) -> list[np.ndarray]:
    """Load ``frame_*.png`` files in name order as RGB frames."""
    frame_dir = Path(frame_dir)
    if not frame_dir.is_dir():
        raise FileNotFoundError(f"frame directory not found: {frame_dir}")
    files = sorted(frame_dir.glob("frame_*.png"))
    if not files:
        raise FileNotFoundError(f"no frame_*.png files in {frame_dir}")
    frames = []
    for f in files:
        img = load_image(f)
        if img.ndim == 2:
            img = np.repeat(img[..., None], 3, axis=2)
        frames.append(img)
    return frames
