import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_sketch
from semsketch.errors import (
    BadMagicError,
    CorruptPayloadError,
    ProtocolError,
    ShapeError,
    TruncatedPayloadError,
    VersionMismatchError,
)
from semsketch.foreground import InstanceTrack
from semsketch.imaging import png_bytes, rle_encode, sign_mask
from semsketch.sketch_codec import (
    EdgeExtractorConfig,
    EncoderConfig,
    MaskedSketchVideo,
    SketchVideo,
    background_regions,
    compose_static_background,
    decode_container,
    decode_sketch_container,
    encode_container,
    encode_sketch_container,
    encode_video,
    extract_sketch,
    mask_sketch,
    reconstruct_sketch,
)
from semsketch.synth import generate_video


def row(*v):
    return np.array([v], dtype=np.uint8)


def brow(*v):
    return np.array([v], dtype=bool)


S1, ST, SNOW = row(255, 0, 0, 0), row(0, 0, 0, 255), row(0, 255, 0, 0)
M1, MT = brow(1, 0, 0, 0), brow(0, 1, 0, 0)


class TestExtractSketch:
    def test_constant_frame(self):
        frame = np.full((20, 30, 3), 90, np.uint8)
        assert not extract_sketch(frame).any()

    @pytest.mark.parametrize("operator", ["hysteresis", "gradient-magnitude"])
    @pytest.mark.parametrize("col", [5, 12, 23])
    def test_vertical_step(self, operator, col):
        frame = np.zeros((16, 30, 3), np.uint8)
        frame[:, col:] = 255
        sk = extract_sketch(frame, EdgeExtractorConfig(operator=operator))
        assert set(np.unique(sk)) <= {0, 255}
        cols = np.flatnonzero(sk.any(axis=0))
        assert len(cols) > 0
        # the step sits between columns col-1 and col
        assert np.all(np.abs(cols - col) <= 1)

    def test_checkerboard_has_edges(self):
        frame = np.kron((np.indices((8, 8)).sum(0) % 2) * 255, np.ones((2, 2))).astype(np.uint8)
        frame = np.repeat(frame[..., None], 3, axis=2)
        assert (extract_sketch(frame) > 0).mean() > 0

    def test_hysteresis_extends_strong_edges(self):
        # a step whose contrast fades along the edge: low part only survives via hysteresis
        frame = np.zeros((40, 20, 3), np.uint8)
        contrast = np.linspace(120, 20, 40).astype(np.uint8)
        frame[:, 10:] = contrast[:, None, None]
        single = extract_sketch(frame, EdgeExtractorConfig(operator="gradient-magnitude"))
        hyst = extract_sketch(frame, EdgeExtractorConfig(operator="hysteresis"))
        assert (hyst > 0).sum() > (single > 0).sum()
        assert not (single & ~hyst).any()

    def test_bad_config(self):
        with pytest.raises(ValueError):
            EdgeExtractorConfig(low_threshold=200, high_threshold=100)
        with pytest.raises(ValueError):
            EdgeExtractorConfig(operator="laplace")


class TestComposeStaticBackground:
    def test_hand_example(self):
        assert np.array_equal(compose_static_background(SNOW, S1, ST, MT, M1), row(0, 255, 0, 0))

    def test_pure_background(self, rng):
        s_t, s_1, s_T = (random_sketch(rng, (5, 6)) for _ in range(3))
        zero = np.zeros((5, 6), bool)
        assert np.array_equal(compose_static_background(s_t, s_1, s_T, zero, zero), s_1)

    def test_pure_foreground(self, rng):
        s_t, s_1, s_T = (random_sketch(rng, (5, 6)) for _ in range(3))
        m_1 = rng.random((5, 6)) < 0.5
        assert np.array_equal(compose_static_background(s_t, s_1, s_T, np.ones((5, 6), bool), m_1), s_t)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            compose_static_background(SNOW, S1, ST, MT, np.zeros((1, 5), bool))

    @settings(max_examples=100)
    @given(arrays(bool, (6, 6)), arrays(bool, (6, 6)))
    def test_partition(self, m_t, m_1):
        regions = background_regions(m_t, m_1)
        # arithmetic coefficients in region order: m_t, vac, 1 - m_t - vac
        vac = (m_1.astype(int) - (m_1 & m_t).astype(int))
        coeffs = [m_t.astype(int), vac, 1 - m_t.astype(int) - vac]
        assert np.array_equal(sum(coeffs), np.ones((6, 6), int))
        for region, coeff in zip(regions, coeffs):
            assert np.array_equal(region.astype(int), coeff)
        assert np.array_equal(sum(r.astype(int) for r in regions), np.ones((6, 6), int))


class TestMaskSketch:
    def test_hand_example(self):
        assert np.array_equal(mask_sketch(row(0, 255, 0, 0), brow(0, 1, 1, 0)), row(0, 255, 1, 0))

    def test_empty_mask(self, rng):
        assert not mask_sketch(random_sketch(rng, (4, 4)), np.zeros((4, 4), bool)).any()

    def test_full_mask_lifts_to_sentinel(self):
        out = mask_sketch(np.zeros((3, 3), np.uint8), np.ones((3, 3), bool))
        assert (out == 1).all()

    @settings(max_examples=100)
    @given(arrays(bool, (7, 5)), arrays(bool, (7, 5)))
    def test_sign_recovers_mask(self, edges, m):
        s = edges.astype(np.uint8) * 255
        assert np.array_equal(sign_mask(mask_sketch(s, m)), m)


class TestReconstructSketch:
    def test_chain_by_hand(self):
        ms_t = mask_sketch(SNOW, MT)
        ms_1 = mask_sketch(S1, M1)
        assert np.array_equal(reconstruct_sketch(ms_t, S1, ST, ms_1), row(0, 255, 0, 0))

    def test_no_foreground(self, rng):
        s_1, s_T = random_sketch(rng, (4, 6)), random_sketch(rng, (4, 6))
        zero = np.zeros((4, 6), np.uint8)
        assert np.array_equal(reconstruct_sketch(zero, s_1, s_T, zero), s_1)

    def test_full_mask_identity(self, rng):
        s = random_sketch(rng, (4, 6))
        ms = mask_sketch(s, np.ones((4, 6), bool))
        out = reconstruct_sketch(ms, random_sketch(rng, (4, 6)), random_sketch(rng, (4, 6)), ms)
        assert np.array_equal(out, s)

    def test_missing_first_mask(self):
        with pytest.raises(ProtocolError):
            reconstruct_sketch(row(0, 0, 0, 0), S1, ST, None)

    @settings(max_examples=100)
    @given(st.data())
    def test_round_trip_matches_composition(self, data):
        shape = (5, 6)
        s_t, s_1, s_T = (data.draw(arrays(bool, shape)).astype(np.uint8) * 255 for _ in range(3))
        m_t, m_1 = data.draw(arrays(bool, shape)), data.draw(arrays(bool, shape))
        ms_1 = mask_sketch(s_1, m_1)
        got = reconstruct_sketch(mask_sketch(s_t, m_t), s_1, s_T, ms_1)
        assert np.array_equal(got, compose_static_background(s_t, s_1, s_T, m_t, m_1))
        assert set(np.unique(got)) <= {0, 255}


def synthetic_msv(rng, t=4, shape=(6, 8), fps=15):
    sketches = [random_sketch(rng, shape) for _ in range(t)]
    masks = [rng.random(shape) < 0.3 for _ in range(t)]
    ref = rng.integers(0, 256, (*shape, 3), dtype=np.uint8)
    return MaskedSketchVideo([mask_sketch(s, m) for s, m in zip(sketches, masks)], sketches[0], sketches[-1], ref, fps)


class TestContainer:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(1, 9), st.integers(1, 9), st.integers(1, 60))
    def test_round_trip(self, seed, t, h, w, fps):
        video = synthetic_msv(np.random.default_rng(seed), t, (h, w), fps)
        assert decode_container(encode_container(video)) == video

    def test_header_layout(self, rng):
        video = synthetic_msv(rng, 3, (6, 8), 15)
        stream = encode_container(video)
        assert stream[:4] == b"MSV1"
        assert struct.unpack_from("<HHHHBB", stream, 4) == (1, 8, 6, 3, 15, 0)

    def test_bad_magic(self, rng):
        stream = encode_container(synthetic_msv(rng))
        with pytest.raises(BadMagicError):
            decode_container(b"MSV2" + stream[4:])

    def test_version_mismatch(self, rng):
        stream = bytearray(encode_container(synthetic_msv(rng)))
        stream[4] = 2
        with pytest.raises(VersionMismatchError):
            decode_container(bytes(stream))

    @pytest.mark.parametrize("cut", [6, 20, -1])
    def test_truncated(self, rng, cut):
        stream = encode_container(synthetic_msv(rng))
        with pytest.raises(TruncatedPayloadError):
            decode_container(stream[:cut])

    def test_trailing_bytes(self, rng):
        with pytest.raises(CorruptPayloadError):
            decode_container(encode_container(synthetic_msv(rng)) + b"\x00")

    def test_run_sum_mismatch(self, rng):
        video = synthetic_msv(rng, 2, (4, 4))
        stream = bytearray(encode_container(video))
        # shrink the last run of the final block by one pixel
        stream[-5] -= 1
        with pytest.raises(CorruptPayloadError):
            decode_container(bytes(stream))

    def test_empty_foreground_size_accounting(self, rng):
        t, shape = 5, (16, 24)
        s_1, s_T = random_sketch(rng, shape), random_sketch(rng, shape)
        ref = rng.integers(0, 256, (*shape, 3), dtype=np.uint8)
        zeros = [np.zeros(shape, np.uint8)] * t
        video = MaskedSketchVideo(zeros, s_1, s_T, ref)
        expected = (
            14
            + 4 + len(png_bytes(ref))
            + 4 + 5 * len(rle_encode(s_1))
            + 4 + 5 * len(rle_encode(s_T))
            + t * (4 + 5)
        )
        assert len(encode_container(video)) == expected

    def test_full_sketch_container(self, rng):
        frames = [random_sketch(rng, (5, 7)) for _ in range(3)]
        ref = rng.integers(0, 256, (5, 7, 3), dtype=np.uint8)
        stream = encode_sketch_container(SketchVideo(frames, 10), ref)
        video, got_ref = decode_sketch_container(stream)
        assert np.array_equal(video.frames, np.stack(frames)) and video.fps == 10
        assert np.array_equal(got_ref, ref)
        with pytest.raises(CorruptPayloadError):
            decode_container(stream)

    def test_invalid_alphabet(self):
        with pytest.raises(ValueError):
            MaskedSketchVideo([np.full((2, 2), 7, np.uint8)] * 2, np.zeros((2, 2), np.uint8),
                              np.zeros((2, 2), np.uint8), np.zeros((2, 2, 3), np.uint8))


class TestEncodeVideo:
    def test_moving_square(self):
        h, w, t = 40, 60, 5
        bg = np.zeros((h, w, 3), np.uint8)
        bg[:, 30:] = 120
        frames, masks = [], []
        for k in range(t):
            f = bg.copy()
            m = np.zeros((h, w), bool)
            m[10:18, 5 + 6 * k:13 + 6 * k] = True
            f[m] = 250
            frames.append(f)
            masks.append(m)
        msv = encode_video(frames, [InstanceTrack("sq", masks)])
        for k in range(t):
            assert np.array_equal(sign_mask(msv.masked_frames[k]), masks[k])
        assert np.array_equal(msv.reference_frame, frames[0])
        assert np.array_equal(msv.keyframe_first, extract_sketch(frames[0]))
        assert np.array_equal(msv.keyframe_last, extract_sketch(frames[-1]))

    def test_static_only(self, small_video):
        static = [small_video.tracks[-1]]
        msv = encode_video(small_video.frames, static)
        assert not msv.masked_frames.any()

    def test_two_movers_union(self, small_video):
        movers = small_video.tracks[:2]
        msv = encode_video(small_video.frames, small_video.tracks, EncoderConfig(iou_threshold=0.8))
        for k in range(len(small_video.frames)):
            expected = movers[0].masks[k] | movers[1].masks[k]
            assert np.array_equal(sign_mask(msv.masked_frames[k]), expected)

    def test_track_length_mismatch(self, small_video):
        short = InstanceTrack("s", small_video.tracks[0].masks[:3])
        with pytest.raises(ShapeError):
            encode_video(small_video.frames, [short])

    def test_needs_two_frames(self, small_video):
        with pytest.raises(ShapeError):
            encode_video(small_video.frames[:1], [])


def test_masked_container_smaller_on_sparse_foreground():
    video = generate_video(np.random.default_rng(3), frames=6)
    msv = encode_video(video.frames, video.tracks)
    full = SketchVideo([extract_sketch(f) for f in video.frames])
    assert len(encode_container(msv)) < len(encode_sketch_container(full, video.frames[0]))
