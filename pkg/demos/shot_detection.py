"""
Shot detection on a synthetic video
===================================

Build a short video out of solid-color segments with a little noise, find
the cuts from consecutive histogram distances, and pick three key frames
per shot.
"""

import numpy as np

from vidmine import (
    CutPolicy,
    FrameImage,
    build_shots,
    consecutive_distances,
    detect_cuts,
    frame_histograms,
    select_keyframes,
)

rng = np.random.default_rng(0)

###############################################################################
# Four segments of different lengths. Each frame is a base color plus noise,
# so the within-shot distances are small but not zero.
segments = [((200, 30, 30), 12), ((30, 180, 60), 7), ((40, 40, 220), 15), ((200, 30, 30), 5)]
frames = []
for rgb, length in segments:
    for _ in range(length):
        px = np.clip(rng.normal(rgb, 12, size=(24, 32, 3)), 0, 255).astype(np.uint8)
        frames.append(FrameImage(32, 24, px))

hists = frame_histograms(frames, bins_per_channel=16)
dist = consecutive_distances(hists)
print("consecutive distances: min %.3f, median %.3f, max %.3f" % (dist.min(), np.median(dist), dist.max()))

###############################################################################
# The fixed threshold (tau = 1.0) works on clean synthetic input. The
# adaptive rule puts the threshold at mean + alpha * std of all distances.
for policy in (CutPolicy("fixed", tau=1.0), CutPolicy("adaptive", alpha=3.0)):
    cuts = detect_cuts(dist, policy)
    print(policy.mode, "cuts after frames", cuts)

shots = build_shots(len(frames), detect_cuts(dist, CutPolicy()))

###############################################################################
# First, middle and last frame of each shot.
for shot in shots:
    print("shot %d: frames %d-%d, key frames %s" % (shot.id, shot.start, shot.end,
                                                    tuple(select_keyframes(shot))))
