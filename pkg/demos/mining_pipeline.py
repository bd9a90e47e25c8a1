"""
End-to-end mining and query by example
======================================

Write a synthetic clip as PPM frames, run the whole pipeline, then look at
the clusters, the shot hierarchy, and a query-by-example ranking.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from vidmine import FrameImage, PipelineConfig, encode_ppm, query_shots, run_pipeline
from vidmine.pipeline import frame_query_descriptor

rng = np.random.default_rng(2)
workdir = Path(tempfile.mkdtemp())
frames_dir = workdir / "frames"
frames_dir.mkdir()

###############################################################################
# Eight shots drawn from three "scenes". Zero-padded names keep the frame
# order when the directory is sorted.
palette = {"beach": (230, 200, 120), "forest": (40, 120, 50), "night": (20, 20, 60)}
script = ["beach", "forest", "night", "beach", "night", "forest", "beach", "night"]
i = 0
for scene in script:
    for _ in range(rng.integers(4, 9)):
        px = np.clip(rng.normal(palette[scene], 10, size=(18, 24, 3)), 0, 255).astype(np.uint8)
        (frames_dir / f"{i:06d}.ppm").write_bytes(encode_ppm(FrameImage(24, 18, px)))
        i += 1

###############################################################################
cfg = PipelineConfig(str(frames_dir), k=3, restarts=5, group_count=3, out=str(workdir / "out"))
result = run_pipeline(cfg)
print("%d frames -> %d shots" % (result.num_frames, len(result.shots)))
print("cluster labels:", result.partition.labels.tolist())
print("group labels:  ", result.group_labels.tolist())
print("script:        ", script)

###############################################################################
# Query with a fresh "night" frame.
px = np.clip(rng.normal(palette["night"], 10, size=(18, 24, 3)), 0, 255).astype(np.uint8)
query_path = workdir / "query.ppm"
query_path.write_bytes(encode_ppm(FrameImage(24, 18, px)))
q = frame_query_descriptor(query_path, result.bins_per_channel)
for shot, score in query_shots(q, result.descriptors, top_k=3):
    print("shot %d (%s): %.3f" % (shot, script[shot], score))

print(json.dumps(json.loads((workdir / "out" / "clusters.json").read_text()), indent=None)[:200])
