"""Shot segmentation, key-frame descriptors and cohesion-maximizing clustering for video."""

from .errors import (
    ConfigError,
    DegenerateInputError,
    EmptyClusterError,
    InputError,
    InvariantError,
    PPMFormatError,
    ShapeError,
    VidmineError,
)
from .frames import (
    FrameHistogram,
    FrameImage,
    decode_ppm,
    encode_ppm,
    frame_histogram,
    frame_histograms,
    histogram_l1,
    to_descriptor,
)
from .grouping import Dendrogram, agglomerate, cosine_sim, query_shots
from .keyframes import KeyFrameTriple, select_keyframes, shot_descriptor, shot_descriptors
from .lsclust import (
    LscConfig,
    MoveDelta,
    Partition,
    best_move,
    brute_force_optimum,
    cluster,
    cohesion,
    incremental_delta,
    init_partition,
    kmeans_cluster,
    kmeans_delta,
    kmeans_then_lsc,
    lsc_cluster,
    objective,
    tcls_step,
)
from .pipeline import PipelineConfig, PipelineResult, ingest, run_pipeline
from .shots import CutPolicy, Shot, build_shots, consecutive_distances, detect_cuts

__version__ = "0.1.0"
