"""Exit criteria. Each test records one PASS/FAIL line shown after the run."""
import json
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import random_sketch
from semsketch.cli import main
from semsketch.decoder import (
    StyleVector,
    adain,
    align_features,
    attention_correlation,
    attention_weights,
    compose_frame,
    warp,
    zero_flow,
)
from semsketch.foreground import InstanceTrack, instance_iou
from semsketch.imaging import sign_mask
from semsketch.metrics import psnr, ssim
from semsketch.sketch_codec import (
    compose_static_background,
    decode_container,
    encode_container,
    encode_video,
    extract_sketch,
    foreground_masks,
    mask_sketch,
)
from semsketch.synth import generate_video
from test_metrics import ssim_oracle

pytestmark = pytest.mark.acceptance

N_VIDEOS, N_FRAMES, WIDTH, HEIGHT = 8, 16, 256, 128


def test_01_sketch_codec_round_trip(record):
    exact, total, slowest = 0, 0, 0.0
    for seed in range(N_VIDEOS):
        video = generate_video(np.random.default_rng(seed), WIDTH, HEIGHT, N_FRAMES, n_movers=2, n_static=1)
        start = time.perf_counter()
        msv = decode_container(encode_container(encode_video(video.frames, video.tracks)))
        rebuilt = [msv.reconstruct(t) for t in range(N_FRAMES)]
        slowest = max(slowest, time.perf_counter() - start)
        # expected side: full sketches and masks recomputed independently of the container
        sketches = [extract_sketch(f) for f in video.frames]
        masks = foreground_masks(video.tracks, N_FRAMES, (HEIGHT, WIDTH), 0.8)
        for t in range(N_FRAMES):
            expected = compose_static_background(sketches[t], sketches[0], sketches[-1], masks[t], masks[0])
            exact += np.array_equal(rebuilt[t], expected)
            total += 1
    ok = exact == total and slowest < 2.0
    record(1, ok, f"{exact}/{total} frames pixel-exact, slowest video {slowest:.3f} s (< 2 s)")
    assert ok


def test_02_mask_recovery(record, rng):
    hits = 0
    for _ in range(1000):
        shape = tuple(rng.integers(1, 24, 2))
        s = random_sketch(rng, shape, rng.random())
        m = rng.random(shape) < rng.random()
        hits += np.array_equal(sign_mask(mask_sketch(s, m)), m)
    record(2, hits == 1000, f"{hits}/1000 random pairs recovered exactly")
    assert hits == 1000


def test_03_iou_oracle(record, rng):
    matches = 0
    for _ in range(100):
        t = int(rng.integers(1, 9))
        h, w = (int(v) for v in rng.integers(1, 33, 2))
        masks = [rng.random((h, w)) < rng.uniform(0.3, 0.95) for _ in range(t)]
        masks[0][0, 0] = True
        sets = [{(y, x) for y in range(h) for x in range(w) if mk[y, x]} for mk in masks]
        oracle = len(set.intersection(*sets)) / len(set.union(*sets))
        matches += instance_iou(InstanceTrack("r", masks)) == oracle
    record(3, matches == 100, f"{matches}/100 tracks equal the brute-force pixel-set IoU")
    assert matches == 100


def test_04_compression_direction(record, tmp_path):
    corpus = tmp_path / "corpus"
    main(["synth", "--out", str(corpus), "--seed", "0", "--videos", str(N_VIDEOS), "--frames", str(N_FRAMES),
          "--width", str(WIDTH), "--height", str(HEIGHT)])
    assert main(["report", str(corpus), "--out", str(tmp_path / "report")]) == 0
    summary = json.loads((tmp_path / "report" / "report.json").read_text())
    failures, checked = [], 0
    for rec in summary["videos"]:
        sz = rec["sizes"]
        frac = sz["max_foreground_fraction"]
        if frac < 0.5:
            checked += 1
            if not sz["masked_size"] <= sz["sketch_size"]:
                failures.append(rec["video"])
            if frac < 0.25 and not sz["masked_size"] < sz["sketch_size"]:
                failures.append(rec["video"])
    ratio = summary["corpus_mean"]["masked_to_sketch"]
    ok = not failures and checked == N_VIDEOS
    record(4, ok, f"{checked} videos checked, mean masked/sketch = {ratio:.3f}, failures: {failures or 'none'}")
    assert ok


def test_05_blend_limits_and_sandwich(record, rng):
    warped = rng.integers(0, 256, (100, 100, 3), dtype=np.uint8)
    generated = rng.integers(0, 256, (100, 100, 3), dtype=np.uint8)
    limits = (
        np.array_equal(compose_frame(warped, generated, np.zeros((100, 100))), warped)
        and np.array_equal(compose_frame(warped, generated, np.ones((100, 100))), generated)
    )
    out = compose_frame(warped, generated, rng.random((100, 100)))
    inside = np.all((out >= np.minimum(warped, generated)) & (out <= np.maximum(warped, generated)), axis=2)
    ok = limits and inside.all()
    record(5, ok, f"limits bit-exact={limits}, sandwich holds on {int(inside.sum())}/10000 pixels")
    assert ok


def test_06_warp_identity_and_shift(record, rng):
    frame = rng.integers(0, 256, (37, 53, 3), dtype=np.uint8)
    identity = np.array_equal(warp(frame, zero_flow(frame.shape)), frame)
    shift_ok = True
    for dx, dy in [(1, 0), (-2, 3), (0, -1), (4, 4)]:
        flow = np.zeros((37, 53, 2))
        flow[..., 0], flow[..., 1] = dx, dy
        ys, xs = np.mgrid[0:37, 0:53]
        oracle = frame[np.clip(ys + dy, 0, 36), np.clip(xs + dx, 0, 52)]
        shift_ok &= np.array_equal(warp(frame, flow, "clamp"), oracle)
    ok = identity and shift_ok
    record(6, ok, f"zero-flow identity={identity}, integer shifts match index oracle={shift_ok}")
    assert ok


def test_07_attention_suite(record, rng):
    corr = rng.uniform(-1, 1, (64, 80))
    row_err = max(
        np.abs(attention_weights(corr, alpha).sum(axis=1) - 1).max() for alpha in (0.1, 1.0, 10.0, 100.0, 1000.0)
    )
    q = rng.normal(size=(64, 6, 8))
    ar = attention_correlation(q, q)
    diag_argmax = np.array_equal(attention_weights(ar, 100.0).argmax(axis=1), np.arange(48))
    v = rng.uniform(0, 255, (3, 6, 8))
    align_err = np.abs(align_features(ar, v, 100.0) - v).max()
    k = rng.normal(size=(64, 6, 8))
    scale_err = np.abs(attention_correlation(2.5 * q, 0.3 * k) - attention_correlation(q, k)).max()
    ok = row_err <= 1e-6 and diag_argmax and align_err < 1e-3 and scale_err < 1e-9
    record(7, ok, f"row-sum err {row_err:.1e}, diagonal argmax={diag_argmax}, "
                  f"X_cor err {align_err:.1e}, scale err {scale_err:.1e}")
    assert ok


def test_08_adain(record, rng):
    content = rng.normal(7, 3, (6, 20, 30))
    style = StyleVector(rng.uniform(-50, 50, 6), rng.uniform(0.1, 40, 6))
    out = adain(content, style)
    moment_err = max(np.abs(out.mean(axis=(1, 2)) - style.mean).max(), np.abs(out.std(axis=(1, 2)) - style.std).max())
    ident_err = np.abs(adain(content, StyleVector.from_features(content)) - content).max()
    ok = moment_err < 1e-5 and ident_err < 1e-6
    record(8, ok, f"moment err {moment_err:.1e} (< 1e-5), identity err {ident_err:.1e} (< 1e-6)")
    assert ok


def test_09_metrics(record, rng):
    a = rng.integers(0, 256, (32, 32, 3), dtype=np.uint8)
    self_ssim = ssim(a, a)
    base = np.full((16, 16, 3), 90, np.uint8)
    p = psnr(base, base + 16)
    b = np.clip(a + rng.normal(0, 30, a.shape), 0, 255).astype(np.uint8)
    oracle_err = abs(ssim(a, b) - ssim_oracle(a, b))
    ok = abs(self_ssim - 1) <= 1e-9 and abs(p - 24.05) <= 0.01 and oracle_err < 1e-6
    record(9, ok, f"ssim(a,a)={self_ssim:.12f}, psnr={p:.4f} dB, oracle err {oracle_err:.1e}")
    assert ok


def _pipeline(root: Path) -> float:
    start = time.perf_counter()
    corpus = root / "corpus"
    main(["synth", "--out", str(corpus), "--seed", "42", "--videos", str(N_VIDEOS), "--frames", str(N_FRAMES),
          "--width", str(WIDTH), "--height", str(HEIGHT)])
    for k in range(N_VIDEOS):
        vdir = corpus / f"video_{k}"
        assert main(["encode", str(vdir), "--out", str(root / f"video_{k}.msv1")]) == 0
        assert main(["decode", str(root / f"video_{k}.msv1"), "--out", str(root / "decoded" / f"video_{k}")]) == 0
        assert main(["evaluate", str(vdir / "frames"), str(root / "decoded" / f"video_{k}"),
                     "--out", str(root / f"video_{k}.json")]) == 0
    return time.perf_counter() - start


def _artifacts(root: Path) -> dict:
    return {
        p.relative_to(root).as_posix(): p.read_bytes()
        for p in root.rglob("*")
        if p.is_file() and p.suffix in (".msv1", ".png", ".json") and "corpus" not in p.parts
    }


def test_10_end_to_end_determinism(record, tmp_path, monkeypatch):
    # report files embed the paths they were given, so run both pipelines from the same relative root
    timings, artifacts = [], []
    for name in ("run_a", "run_b"):
        base = tmp_path / name
        base.mkdir()
        monkeypatch.chdir(base)
        timings.append(_pipeline(Path("out")))
        artifacts.append(_artifacts(Path("out")))
    same = artifacts[0].keys() == artifacts[1].keys() and all(artifacts[0][k] == artifacts[1][k] for k in artifacts[0])
    n_msv = sum(k.endswith(".msv1") for k in artifacts[0])
    n_png = sum(k.endswith(".png") for k in artifacts[0])
    ok = same and n_msv == N_VIDEOS and n_png == N_VIDEOS * N_FRAMES and max(timings) < 60.0
    record(10, ok, f"byte-identical={same} ({n_msv} containers, {n_png} frames, {N_VIDEOS} reports), "
                   f"runtimes {timings[0]:.1f} s / {timings[1]:.1f} s (< 60 s)")
    assert ok
