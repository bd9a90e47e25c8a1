"""Hard-cut shot boundary detection from consecutive histogram distances."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, InputError
from .frames import FrameHistogram, stack_values


@dataclass(frozen=True)
class Shot:
    """Inclusive frame range ``[start, end]``."""

    id: int
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise InputError(f"shot {self.id}: start {self.start} > end {self.end}")

    def __len__(self):
        return self.end - self.start + 1

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class CutPolicy:
    """Threshold rule for declaring a cut.

    ``fixed`` cuts where the distance exceeds ``tau``; ``adaptive`` cuts where
    it exceeds ``mean + alpha * std`` of all distances in the video.
    """

    mode: str = "fixed"
    tau: float = 1.0
    alpha: float = 3.0

    def __post_init__(self):
        if self.mode not in ("fixed", "adaptive"):
            raise ConfigError(f"cut mode must be 'fixed' or 'adaptive', got {self.mode!r}")
        if self.mode == "fixed" and not self.tau > 0:
            raise ConfigError(f"tau must be > 0, got {self.tau}")
        if self.mode == "adaptive" and not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")

    def to_dict(self):
        return {"mode": self.mode, "tau": float(self.tau), "alpha": float(self.alpha)}


def consecutive_distances(histograms: Sequence[FrameHistogram]) -> np.ndarray:
    """L1 distance between each frame's histogram and the next one's."""
    if len(histograms) < 2:
        raise InputError(f"video too short: need at least 2 frames, got {len(histograms)}")
    values = stack_values(histograms)
    return np.abs(np.diff(values, axis=0)).sum(axis=1)


def cut_threshold(distances, policy: CutPolicy) -> float:
    d = np.asarray(distances, dtype=np.float64)
    if policy.mode == "fixed":
        return float(policy.tau)
    return float(d.mean() + policy.alpha * d.std())


def detect_cuts(distances, policy: CutPolicy = CutPolicy()) -> list[int]:
    """Positions ``t`` with a boundary between frames ``t`` and ``t + 1``."""
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 1 or d.size == 0:
        raise InputError("detect_cuts needs a non-empty 1-d sequence of distances")
    threshold = cut_threshold(d, policy)
    return [int(t) for t in np.flatnonzero(d > threshold)]


def build_shots(num_frames: int, cuts: Sequence[int]) -> list[Shot]:
    if num_frames < 1:
        raise InputError(f"num_frames must be >= 1, got {num_frames}")
    prev = -1
    for c in cuts:
        if not 0 <= c <= num_frames - 2:
            raise InputError(f"cut position {c} outside [0, {num_frames - 2}]")
        if c <= prev:
            raise InputError(f"cut positions must be strictly ascending, got {list(cuts)}")
        prev = c
    starts = [0] + [c + 1 for c in cuts]
    ends = list(cuts) + [num_frames - 1]
    return [Shot(i, int(s), int(e)) for i, (s, e) in enumerate(zip(starts, ends))]


def segment(histograms: Sequence[FrameHistogram], policy: CutPolicy = CutPolicy()) -> list[Shot]:
    """Distances, cuts and shots in one call."""
    cuts = detect_cuts(consecutive_distances(histograms), policy)
    return build_shots(len(histograms), cuts)
