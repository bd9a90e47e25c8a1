"""First/middle/last key frames and the fused per-shot descriptor."""

from __future__ import annotations

from collections.abc import Mapping
from typing import NamedTuple

import numpy as np

from .frames import to_descriptor
from .shots import Shot


class KeyFrameTriple(NamedTuple):
    first: int
    middle: int
    last: int


def select_keyframes(shot: Shot) -> KeyFrameTriple:
    return KeyFrameTriple(shot.start, (shot.start + shot.end) // 2, shot.end)


def _lookup(histograms, idx):
    if isinstance(histograms, Mapping):
        try:
            return histograms[idx]
        except KeyError:
            raise LookupError(f"no histogram for frame {idx}") from None
    if not 0 <= idx < len(histograms):
        raise LookupError(f"no histogram for frame {idx} (have {len(histograms)} frames)")
    return histograms[idx]


def shot_descriptor(triple: KeyFrameTriple, histograms) -> np.ndarray:
    """Mean of the three key-frame descriptors, rescaled to unit length.

    ``histograms`` is a sequence indexed by frame number or a mapping from
    frame number to histogram.
    """
    vecs = [to_descriptor(_lookup(histograms, i)) for i in triple]
    return to_descriptor(np.mean(vecs, axis=0))


def shot_descriptors(shots, histograms) -> np.ndarray:
    """Stack of ``shot_descriptor`` for every shot, shape ``(n_shots, dim)``."""
    return np.stack([shot_descriptor(select_keyframes(s), histograms) for s in shots])
