"""
Plugging in external flow and occlusion
=======================================

Estimators are plain callables, so precomputed tensors (for example from a
learned model) can replace the reference ones.
"""
import tempfile
from pathlib import Path

import numpy as np

from semsketch import decode_video, encode_video
from semsketch.decoder import PrecomputedFlow, PrecomputedOcclusion, save_tensor
from semsketch.synth import generate_video

video = generate_video(np.random.default_rng(7), width=64, height=48, frames=5, n_movers=1)
masked = encode_video(video.frames, video.tracks)
t, h, w = len(video.frames), 48, 64

# tensors are raw float32 files with a JSON sidecar describing shape and role
tmp = Path(tempfile.mkdtemp())
save_tensor(tmp / "flow.f32", np.zeros((t - 1, h, w, 2)), "flow")
save_tensor(tmp / "occ.f32", np.zeros((t - 1, h, w)), "occlusion")
flow = PrecomputedFlow(tmp / "flow.f32")
occlusion = PrecomputedOcclusion(tmp / "occ.f32")

# zero flow with an empty occlusion mask simply repeats the first frame
decoded = decode_video(masked, flow_estimator=flow, occlusion_estimator=occlusion)
print("all frames equal frame 0:", all(np.array_equal(f, video.frames[0]) for f in decoded))


def half_and_half(prev_frames, sketches, flow_field, cfg):
    m = np.zeros(sketches[-1].shape)
    m[:, : sketches[-1].shape[1] // 2] = 0.5
    return m


decoded = decode_video(masked, occlusion_estimator=half_and_half)
print("decoded", len(decoded), "frames with a custom occlusion callable")
