"""Frame decoding and color-histogram features."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadMagicError,
    ConfigError,
    DegenerateInputError,
    MalformedHeaderError,
    ShapeError,
    TruncatedDataError,
    UnsupportedMaxvalError,
    ZeroDimensionError,
)

DEFAULT_BINS = 16

_WHITESPACE = b" \t\n\r\v\f"


@dataclass(frozen=True)
class FrameImage:
    """An 8-bit RGB frame.

    ``pixels`` has shape ``(height, width, 3)`` and dtype uint8, i.e. the
    row-major sequence of (R, G, B) triples.
    """

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ShapeError(f"frame dimensions must be >= 1, got {self.width}x{self.height}")
        pixels = np.asarray(self.pixels)
        if pixels.dtype != np.uint8:
            raise ShapeError(f"pixels must be uint8, got {pixels.dtype}")
        pixels = pixels.reshape(self.height, self.width, 3)
        pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def solid(cls, width, height, rgb):
        pixels = np.empty((height, width, 3), dtype=np.uint8)
        pixels[...] = rgb
        return cls(width, height, pixels)


@dataclass(frozen=True)
class FrameHistogram:
    """Concatenated per-channel histogram: R bins, then G bins, then B bins.

    Each channel block sums to one.
    """

    bins_per_channel: int
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (3 * self.bins_per_channel,):
            raise ShapeError(
                f"expected {3 * self.bins_per_channel} histogram values, got shape {values.shape}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def channel(self, c):
        b = self.bins_per_channel
        return self.values[c * b:(c + 1) * b]


def _skip_ws_and_comments(data, pos):
    while pos < len(data):
        ch = data[pos:pos + 1]
        if ch == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        elif ch in _WHITESPACE:
            pos += 1
        else:
            break
    return pos


def _read_int(data, pos, what):
    pos = _skip_ws_and_comments(data, pos)
    start = pos
    while pos < len(data) and data[pos:pos + 1].isdigit():
        pos += 1
    if start == pos:
        if pos >= len(data):
            raise TruncatedDataError(f"header ends before {what}", pos)
        raise MalformedHeaderError(f"expected integer {what}", pos)
    return int(data[start:pos]), start, pos


def decode_ppm(data: bytes) -> FrameImage:
    """Parse a binary PPM (P6, maxval 255) file."""
    data = bytes(data)
    if data[:2] != b"P6":
        raise BadMagicError(f"bad magic number {data[:2]!r}, expected b'P6'", 0)
    pos = 2
    if pos < len(data) and data[pos:pos + 1] not in _WHITESPACE and data[pos:pos + 1] != b"#":
        raise BadMagicError("magic number must be followed by whitespace", pos)
    width, wpos, pos = _read_int(data, pos, "width")
    height, hpos, pos = _read_int(data, pos, "height")
    maxval, mpos, pos = _read_int(data, pos, "maxval")
    if width == 0:
        raise ZeroDimensionError("zero width", wpos)
    if height == 0:
        raise ZeroDimensionError("zero height", hpos)
    if maxval != 255:
        raise UnsupportedMaxvalError(f"unsupported maxval {maxval}", mpos)
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise TruncatedDataError("missing whitespace after maxval", pos)
    pos += 1
    need = width * height * 3
    if len(data) - pos < need:
        raise TruncatedDataError(
            f"pixel data truncated: need {need} bytes, have {len(data) - pos}", len(data)
        )
    pixels = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos)
    return FrameImage(width, height, pixels.reshape(height, width, 3))


def encode_ppm(frame: FrameImage) -> bytes:
    header = f"P6\n{frame.width} {frame.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(frame.pixels).tobytes()


def frame_histogram(frame: FrameImage, bins_per_channel: int = DEFAULT_BINS) -> FrameHistogram:
    """Per-channel fraction of pixels in each of ``bins_per_channel`` bins.

    Channel value v goes to bin ``floor(v * B / 256)``, so 255 lands in B-1.
    """
    if bins_per_channel < 2:
        raise ConfigError(f"bins_per_channel must be >= 2, got {bins_per_channel}")
    b = int(bins_per_channel)
    flat = frame.pixels.reshape(-1, 3).astype(np.int64)
    idx = (flat * b) // 256
    npix = flat.shape[0]
    values = np.concatenate(
        [np.bincount(idx[:, c], minlength=b) / npix for c in range(3)]
    )
    return FrameHistogram(b, values)


def frame_histograms(
    frames: Iterable[FrameImage], bins_per_channel: int = DEFAULT_BINS, workers: int = 1
) -> list[FrameHistogram]:
    """Histogram many frames, optionally on a thread pool. Output is in input order."""
    if bins_per_channel < 2:
        raise ConfigError(f"bins_per_channel must be >= 2, got {bins_per_channel}")
    if workers <= 1:
        return [frame_histogram(f, bins_per_channel) for f in frames]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda f: frame_histogram(f, bins_per_channel), frames))


def histogram_l1(a: FrameHistogram, b: FrameHistogram) -> float:
    if a.bins_per_channel != b.bins_per_channel:
        raise ShapeError(
            f"histogram bin counts differ: {a.bins_per_channel} vs {b.bins_per_channel}"
        )
    return float(np.abs(a.values - b.values).sum())


def to_descriptor(h: FrameHistogram | np.ndarray) -> np.ndarray:
    """Scale a histogram to unit L2 norm."""
    values = np.asarray(getattr(h, "values", h), dtype=np.float64)
    norm = np.linalg.norm(values)
    if not norm > 0:
        raise DegenerateInputError("cannot normalize a zero vector")
    return values / norm


def stack_values(histograms: Sequence[FrameHistogram]) -> np.ndarray:
    """Histograms as an ``(n_frames, 3B)`` array; all must share B."""
    if not histograms:
        return np.empty((0, 0))
    b = histograms[0].bins_per_channel
    for i, h in enumerate(histograms):
        if h.bins_per_channel != b:
            raise ShapeError(f"frame {i} has {h.bins_per_channel} bins per channel, expected {b}")
    return np.stack([h.values for h in histograms])
