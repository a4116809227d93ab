"""
Choosing foreground instances by temporal IoU
=============================================

An instance whose masks barely change over the clip is part of the
background; only low-IoU (moving) instances stay in the foreground.
"""
import numpy as np

from semsketch import InstanceTrack, classify_foreground, frame_foreground_mask, instance_iou

frames, h, w = 6, 32, 48
moving, parked = [], []
for t in range(frames):
    m = np.zeros((h, w), bool)
    m[10:20, 4 + 5 * t:14 + 5 * t] = True
    moving.append(m)
    p = np.zeros((h, w), bool)
    p[2:8, 30:40] = True
    parked.append(p)

tracks = [InstanceTrack("walker", moving), InstanceTrack("car", parked)]
for tr in tracks:
    print(f"{tr.instance_id:>7}: IoU = {instance_iou(tr):.3f}")

fg = classify_foreground(tracks, threshold=0.8)
print("foreground instances:", [tr.instance_id for tr in fg.tracks])

# per-frame mask is the union of the kept instances (0-based frame index)
print("foreground pixels in frame 3:", int(frame_foreground_mask(fg, 3).sum()))
