import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vidmine import FrameImage, encode_ppm  # noqa: E402

DATA = Path(__file__).parent / "data"

RED = (255, 0, 0)
GREEN = (0, 255, 0)
BLUE = (0, 0, 255)


def write_video(directory, colors, size=(4, 3)):
    """One solid-color PPM per entry of ``colors``, zero-padded names."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i, rgb in enumerate(colors):
        frame = FrameImage.solid(size[0], size[1], rgb)
        (directory / f"frame_{i:05d}.ppm").write_bytes(encode_ppm(frame))
    return directory


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def red_blue_video(tmp_path):
    return write_video(tmp_path / "frames", [RED] * 3 + [BLUE] * 3)


_acceptance_lines = []


def record_acceptance(line):
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
