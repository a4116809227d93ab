"""``semsketch`` command line: synth, encode, decode, evaluate, report.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .decoder import DecoderConfig, decode_video
from .errors import SemsketchError
from .foreground import load_tracks_dir, load_tracks_manifest
from .imaging import save_image
from .metrics import evaluate_video, size_report, write_report
from .sketch_codec import (
    EdgeExtractorConfig,
    EncoderConfig,
    decode_container,
    encode_container,
    extract_sketch_video,
    foreground_masks,
    mask_sketch_video,
)
from .synth import FRAME_PATTERN, load_frames, write_corpus

logger = logging.getLogger("semsketch")

LOG_ENV = "SEMSKETCH_LOG"

_FLOW_FLAGS = {"zero": "zero", "block": "block-matching"}
_OCCLUSION_FLAGS = {"disagreement": "sketch-disagreement", "one": "constant-one"}


class UsageError(Exception):
    pass


@dataclass
class PipelineConfig:
    edge_operator: str = "hysteresis"
    low_threshold: float = 50.0
    high_threshold: float = 100.0
    blur_radius: float = 1.0
    iou_threshold: float = 0.8
    fps: int = 15
    window: int = 1
    alpha: float = 100.0
    feature_scale: int = 4
    flow: str = "block"
    occlusion: str = "disagreement"
    border: str = "clamp"

    @classmethod
    def resolve(cls, config_path: Optional[str], overrides: dict) -> "PipelineConfig":
        """File values first, then every non-None command-line override."""
        values = {}
        if config_path:
            path = Path(config_path)
            if not path.is_file():
                raise FileNotFoundError(f"config file not found: {path}")
            values = json.loads(path.read_text())
            known = {f.name for f in dataclasses.fields(cls)}
            unknown = set(values) - known
            if unknown:
                raise UsageError(f"unknown config keys in {path}: {sorted(unknown)}")
        values.update({k: v for k, v in overrides.items() if v is not None})
        cfg = cls(**values)
        cfg.encoder()
        cfg.decoder()
        return cfg

    def encoder(self) -> EncoderConfig:
        edges = EdgeExtractorConfig(self.edge_operator, self.low_threshold, self.high_threshold, self.blur_radius)
        if not 0 < self.iou_threshold <= 1:
            raise UsageError("iou threshold must lie in (0, 1]")
        return EncoderConfig(edges, self.iou_threshold, self.fps)

    def decoder(self) -> DecoderConfig:
        if self.flow not in _FLOW_FLAGS or self.occlusion not in _OCCLUSION_FLAGS:
            raise UsageError(f"flow must be one of {sorted(_FLOW_FLAGS)}, occlusion one of {sorted(_OCCLUSION_FLAGS)}")
        return DecoderConfig(
            window=self.window, alpha=self.alpha, feature_scale=self.feature_scale,
            flow_estimator=_FLOW_FLAGS[self.flow], occlusion_estimator=_OCCLUSION_FLAGS[self.occlusion],
            border_policy=self.border,
        )


def _load_tracks(video_dir: Path, masks: Optional[str], manifest: Optional[str], frame_count: int):
    if manifest:
        return load_tracks_manifest(manifest)
    mask_dir = Path(masks) if masks else video_dir / "masks"
    if not mask_dir.is_dir():
        raise FileNotFoundError(
            f"mask directory not found: {mask_dir} (pass --masks DIR or --manifest FILE)"
        )
    return load_tracks_dir(mask_dir, frame_count)


def encode_dir(video_dir, cfg: PipelineConfig, masks=None, manifest=None):
    """Encode ``video_dir/frames`` with its instance masks; returns (frames, sketches, masked)."""
    video_dir = Path(video_dir)
    frames = load_frames(video_dir / "frames")
    tracks = _load_tracks(video_dir, masks, manifest, len(frames))
    enc = cfg.encoder()
    sketches = extract_sketch_video(frames, enc.edges, enc.fps)
    fg = foreground_masks(tracks, len(frames), sketches.shape, enc.iou_threshold)
    return frames, sketches, mask_sketch_video(sketches, frames[0], fg)


def write_frames(out_dir, frames) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for t, frame in enumerate(frames, start=1):
        save_image(out_dir / FRAME_PATTERN.format(t), frame)


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args, cfg: PipelineConfig) -> int:
    paths = write_corpus(
        args.out, seed=args.seed, n_videos=args.videos, n_movers=args.movers, n_static=args.static,
        width=args.width, height=args.height, frames=args.frames, fps=cfg.fps,
    )
    print(f"wrote {len(paths)} videos to {args.out}")
    return 0


def cmd_encode(args, cfg: PipelineConfig) -> int:
    _, _, masked = encode_dir(args.video, cfg, args.masks, args.manifest)
    stream = encode_container(masked)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(stream)
    print(f"{out}: {len(stream)} bytes")
    return 0


def cmd_decode(args, cfg: PipelineConfig) -> int:
    video = decode_container(Path(args.container).read_bytes())
    frames = decode_video(video, cfg.decoder())
    write_frames(args.out, frames)
    print(f"wrote {len(frames)} frames to {args.out}")
    return 0


def cmd_evaluate(args, cfg: PipelineConfig) -> int:
    report = evaluate_video(load_frames(args.original), load_frames(args.decoded))
    record = {"original": str(args.original), "decoded": str(args.decoded), "quality": report.to_dict()}
    if args.out:
        write_report(args.out, record)
    print(f"PSNR {report.mean_psnr:.4f} dB  SSIM {report.mean_ssim:.6f}  ({report.frame_count} frames)")
    return 0


def cmd_report(args, cfg: PipelineConfig) -> int:
    corpus = Path(args.corpus)
    videos = sorted(p for p in corpus.iterdir() if p.is_dir() and p.name.startswith("video_"))
    if not videos:
        raise FileNotFoundError(f"no video_<k> directories in {corpus}")
    out = Path(args.out) if args.out else corpus / "report"
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for vdir in videos:
        frames, sketches, masked = encode_dir(vdir, cfg)
        stream = encode_container(masked)
        (out / f"{vdir.name}.msv1").write_bytes(stream)
        decoded = decode_video(decode_container(stream), cfg.decoder())
        write_frames(out / vdir.name, decoded)
        sizes = size_report(frames, sketches, masked)
        quality = evaluate_video(frames, decoded)
        records.append({"video": vdir.name, "sizes": sizes.to_dict(), "quality": quality.to_dict()})
        print(
            f"{vdir.name}: raw {sizes.raw_size} B  sketch {sizes.sketch_size} B  masked {sizes.masked_size} B"
            f"  PSNR {quality.mean_psnr:.3f}  SSIM {quality.mean_ssim:.4f}"
        )
    summary = {
        "config": dataclasses.asdict(cfg),
        "videos": records,
        "corpus_mean": {
            "psnr": float(np.mean([r["quality"]["mean_psnr"] for r in records])),
            "ssim": float(np.mean([r["quality"]["mean_ssim"] for r in records])),
            "masked_to_sketch": float(np.mean([r["sizes"]["masked_to_sketch"] for r in records])),
            "masked_to_raw": float(np.mean([r["sizes"]["masked_to_raw"] for r in records])),
        },
    }
    write_report(out / "report.json", summary)
    print(f"report written to {out / 'report.json'}")
    return 0


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--iou-threshold", type=float, dest="iou_threshold")
    common.add_argument("--alpha", type=float)
    common.add_argument("--flow", choices=sorted(_FLOW_FLAGS))
    common.add_argument("--occlusion", choices=sorted(_OCCLUSION_FLAGS))
    common.add_argument("--window", type=int)
    common.add_argument("--fps", type=int)

    parser = _Parser(prog="semsketch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", parents=[common], help="write a seeded synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--videos", type=int, default=8)
    p.add_argument("--movers", type=int, default=2)
    p.add_argument("--static", type=int, default=0)
    p.add_argument("--frames", type=int, default=16)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=128)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("encode", parents=[common], help="encode one video directory to .msv1")
    p.add_argument("video", help="directory holding frames/ and masks/")
    p.add_argument("--masks", help="mask directory (default: <video>/masks)")
    p.add_argument("--manifest", help="JSON mask manifest instead of a mask directory")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", parents=[common], help="decode an .msv1 container to frames")
    p.add_argument("container")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("evaluate", parents=[common], help="PSNR/SSIM of decoded frames")
    p.add_argument("original")
    p.add_argument("decoded")
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", parents=[common], help="encode, decode and score a whole corpus")
    p.add_argument("corpus")
    p.add_argument("--out", help="output directory (default: <corpus>/report)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get(LOG_ENV, "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {
        "iou_threshold": args.iou_threshold, "alpha": args.alpha, "flow": args.flow,
        "occlusion": args.occlusion, "window": args.window, "fps": args.fps,
    }
    try:
        cfg = PipelineConfig.resolve(args.config, overrides)
    except (UsageError, TypeError, ValueError) as exc:
        print(f"semsketch: config error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"semsketch: {exc}", file=sys.stderr)
        return 2
    logger.info("resolved config: %s", json.dumps(dataclasses.asdict(cfg), sort_keys=True))
    try:
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"semsketch: {exc}", file=sys.stderr)
        return 1
    except (SemsketchError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"semsketch: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
