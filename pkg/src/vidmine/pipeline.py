"""Ingestion and the end-to-end shot mining pipeline.

Stages: ingest -> distances -> cuts -> shots -> key frames -> shot descriptors
-> clustering -> agglomerative grouping -> JSON reports.
"""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, InputError, ShapeError, VidmineError
from .frames import DEFAULT_BINS, FrameHistogram, decode_ppm, frame_histogram, to_descriptor
from .grouping import Dendrogram, agglomerate
from .keyframes import KeyFrameTriple, select_keyframes, shot_descriptor
from .lsclust import ALGORITHMS, LscConfig, Partition, cluster, objective
from .shots import CutPolicy, Shot, build_shots, consecutive_distances, detect_cuts

FORMATS = ("ppm-dir", "features-jsonl")
RENORM_TOL = 1e-6


def _read_ppm(path: Path, bins: int) -> FrameHistogram:
    try:
        data = path.read_bytes()
    except OSError as e:
        raise InputError(f"{path}: cannot read file: {e.strerror}") from e
    try:
        return frame_histogram(decode_ppm(data), bins)
    except InputError as e:
        e.args = (f"{path}: {e.args[0]}",)
        raise


def list_ppm_frames(directory) -> list[Path]:
    """``*.ppm`` files in ascending lexicographic filename order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"{directory}: not a directory")
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".ppm" and p.is_file())
    if not files:
        raise InputError(f"{directory}: no .ppm frames found")
    return files


def read_features_jsonl(path, bins: Optional[int] = None) -> list[FrameHistogram]:
    """Load precomputed histograms, one ``{"frame": i, "hist": [...]}`` per line.

    Frame numbers must cover ``0 .. n-1`` exactly. Channel blocks within 1e-6
    of unit mass are renormalized; anything further off is rejected. With
    ``bins=None`` the bin count is taken from the first record.
    """
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise InputError(f"{path}: cannot read file: {e.strerror}") from e
    except UnicodeDecodeError as e:
        raise InputError(f"{path}: not a text file") from e

    by_frame: dict[int, FrameHistogram] = {}
    width = None if bins is None else 3 * bins
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        where = f"{path}:{lineno}"
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise InputError(f"{where}: malformed JSON: {e.msg}") from e
        if not isinstance(rec, dict) or "frame" not in rec or "hist" not in rec:
            raise InputError(f"{where}: record must be an object with 'frame' and 'hist'")
        frame, hist = rec["frame"], rec["hist"]
        if not isinstance(frame, int) or isinstance(frame, bool) or frame < 0:
            raise InputError(f"{where}: 'frame' must be a non-negative integer")
        if not isinstance(hist, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in hist
        ):
            raise InputError(f"{where}: 'hist' must be a list of numbers")
        if width is None:
            if len(hist) < 6 or len(hist) % 3:
                raise ShapeError(f"{where}: hist length {len(hist)} is not 3*B with B >= 2")
            width = len(hist)
        if len(hist) != width:
            raise ShapeError(f"{where}: hist length {len(hist)}, expected {width}")
        if frame in by_frame:
            raise InputError(f"{where}: duplicate frame {frame}")
        values = np.asarray(hist, dtype=np.float64)
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise InputError(f"{where}: histogram values must be finite and non-negative")
        blocks = values.reshape(3, -1)
        mass = blocks.sum(axis=1)
        off = np.abs(mass - 1.0)
        if np.any(off > RENORM_TOL):
            c = int(np.argmax(off))
            raise InputError(f"{where}: channel {c} sums to {mass[c]!r}, expected 1")
        by_frame[frame] = FrameHistogram(width // 3, (blocks / mass[:, None]).ravel())

    if not by_frame:
        raise InputError(f"{path}: no records")
    for i in range(len(by_frame)):
        if i not in by_frame:
            raise InputError(f"{path}: missing frame {i}")
    return [by_frame[i] for i in range(len(by_frame))]


def ingest(path, fmt: str = "ppm-dir", bins: Optional[int] = None, workers: int = 1):
    """Per-frame histograms in frame order."""
    if fmt == "ppm-dir":
        bins = DEFAULT_BINS if bins is None else bins
        if bins < 2:
            raise ConfigError(f"bins must be >= 2, got {bins}")
        files = list_ppm_frames(path)
        if workers > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(lambda f: _read_ppm(f, bins), files))
        return [_read_ppm(f, bins) for f in files]
    if fmt == "features-jsonl":
        if bins is not None and bins < 2:
            raise ConfigError(f"bins must be >= 2, got {bins}")
        return read_features_jsonl(path, bins)
    raise ConfigError(f"unknown input format {fmt!r}; choose from {', '.join(FORMATS)}")


@dataclass
class PipelineConfig:
    input: str
    format: str = "ppm-dir"
    bins: Optional[int] = None
    cut_mode: str = "fixed"
    tau: float = 1.0
    alpha: float = 3.0
    k: int = 2
    algorithm: str = "kmeans-then-lsc"
    seed: int = 0
    restarts: int = 1
    group_count: Optional[int] = None
    group_floor: Optional[float] = None
    out: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ConfigError(f"unknown input format {self.format!r}")
        if self.bins is not None and self.bins < 2:
            raise ConfigError(f"bins must be >= 2, got {self.bins}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if self.group_count is not None and self.group_count < 1:
            raise ConfigError(f"group count must be >= 1, got {self.group_count}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        self.policy  # validates the cut parameters

    @property
    def policy(self) -> CutPolicy:
        return CutPolicy(self.cut_mode, self.tau, self.alpha)

    @property
    def lsc(self) -> LscConfig:
        return LscConfig(seed=self.seed, restarts=self.restarts, workers=self.workers)

    def echo(self):
        """Config as recorded in run.json.

        ``workers`` and ``out`` are left out: neither can change the results.
        """
        d = asdict(self)
        d.pop("workers")
        d.pop("out")
        return d


@dataclass
class PipelineResult:
    config: PipelineConfig
    num_frames: int
    bins_per_channel: Optional[int]
    shots: list[Shot]
    keyframes: list[KeyFrameTriple]
    descriptors: np.ndarray
    partition: Partition
    dendrogram: Dendrogram
    group_labels: np.ndarray
    timings: dict = field(default_factory=dict)

    def reports(self) -> dict:
        """JSON-ready report objects keyed by output filename."""
        return {
            "shots.json": shots_report(self.num_frames, self.config.policy, self.shots),
            "keyframes.json": keyframes_report(self.shots, self.keyframes),
            "descriptors.json": descriptors_report(self.descriptors, self.bins_per_channel),
            "clusters.json": clusters_report(self.partition),
            "groups.json": groups_report(self.dendrogram, self.group_labels),
            "run.json": {
                "config": self.config.echo(),
                "num_frames": self.num_frames,
                "num_shots": len(self.shots),
                "timings": dict(self.timings),
            },
        }


def shots_report(num_frames, policy: CutPolicy, shots):
    return {"num_frames": int(num_frames), "policy": policy.to_dict(),
            "shots": [s.to_dict() for s in shots]}


def keyframes_report(shots, triples):
    return {"shots": [{**s.to_dict(), "keyframes": [int(i) for i in t]}
                      for s, t in zip(shots, triples)]}


def descriptors_report(descriptors, bins_per_channel=None, shot_ids=None):
    X = np.asarray(descriptors)
    ids = range(len(X)) if shot_ids is None else shot_ids
    return {
        "bins_per_channel": bins_per_channel,
        "dim": int(X.shape[1]),
        "descriptors": [{"shot": int(i), "values": [float(v) for v in row]}
                        for i, row in zip(ids, X)],
    }


def clusters_report(p: Partition):
    return {
        "k": p.k,
        "objective": objective(p),
        "moves": int(p.n_moves),
        "trace": [float(t) for t in p.trace],
        "assignment": [int(a) for a in p.labels],
        "seed": int(p.seed if p.seed is not None else 0),
    }


def groups_report(dendrogram: Dendrogram, labels):
    return {**dendrogram.to_dict(), "labels": [int(x) for x in labels]}


def query_report(query: str, results):
    return {"query": query, "results": [{"shot": s, "score": float(v)} for s, v in results]}


def load_descriptors(path):
    """Read ``descriptors.json``. Returns ``(shot_ids, X, bins_per_channel)``."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
        rows = doc["descriptors"]
        ids = [int(r["shot"]) for r in rows]
        X = np.asarray([r["values"] for r in rows], dtype=np.float64)
    except OSError as e:
        raise InputError(f"{path}: cannot read file: {e.strerror}") from e
    except (ValueError, KeyError, TypeError) as e:
        raise InputError(f"{path}: malformed descriptors file ({e})") from e
    if X.ndim != 2 or X.shape[0] == 0:
        raise InputError(f"{path}: no descriptors")
    return ids, X, doc.get("bins_per_channel")


def frame_query_descriptor(path, bins: int) -> np.ndarray:
    """Descriptor of a single PPM frame, for query-by-example."""
    return to_descriptor(_read_ppm(Path(path), bins))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def write_reports(reports: dict, out) -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, obj in reports.items():
        target = out / name
        target.write_text(dumps(obj))
        written.append(target)
    return written


@contextmanager
def _stage(name, timings):
    t0 = time.perf_counter()
    try:
        yield
    except VidmineError as e:
        msg = e.args[0] if e.args else ""
        e.args = (f"[{name}] {msg}",)
        e.stage = name
        raise
    finally:
        timings[name] = time.perf_counter() - t0


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Run every stage; writes the six JSON reports when ``cfg.out`` is set."""
    timings: dict[str, float] = {}
    with _stage("ingest", timings):
        histograms = ingest(cfg.input, cfg.format, cfg.bins, cfg.workers)
    with _stage("detect-shots", timings):
        distances = consecutive_distances(histograms)
        shots = build_shots(len(histograms), detect_cuts(distances, cfg.policy))
    with _stage("keyframes", timings):
        triples = [select_keyframes(s) for s in shots]
        X = np.stack([shot_descriptor(t, histograms) for t in triples])
    with _stage("cluster", timings):
        if len(shots) < cfg.k:
            raise ConfigError(f"only {len(shots)} shots detected but k={cfg.k}; reduce K")
        partition = cluster(X, cfg.k, cfg.algorithm, cfg.lsc)
    with _stage("group", timings):
        n_groups = cfg.group_count
        if n_groups is not None:
            n_groups = min(n_groups, len(shots))
        dendro, labels = agglomerate(X, n_groups, cfg.group_floor)
    result = PipelineResult(
        config=cfg,
        num_frames=len(histograms),
        bins_per_channel=histograms[0].bins_per_channel,
        shots=shots,
        keyframes=triples,
        descriptors=X,
        partition=partition,
        dendrogram=dendro,
        group_labels=labels,
        timings=timings,
    )
    if cfg.out is not None:
        with _stage("write", timings):
            write_reports(result.reports(), cfg.out)
    return result


__all__ = [
    "FORMATS",
    "PipelineConfig",
    "PipelineResult",
    "clusters_report",
    "descriptors_report",
    "dumps",
    "frame_query_descriptor",
    "groups_report",
    "ingest",
    "keyframes_report",
    "list_ppm_frames",
    "load_descriptors",
    "query_report",
    "read_features_jsonl",
    "run_pipeline",
    "shots_report",
    "write_reports",
]
