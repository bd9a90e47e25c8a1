"""Command-line entry point: ``vidmine <subcommand> [options]``.

Exit codes: 0 success, 1 input error, 2 config error, 3 internal invariant failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .errors import ConfigError, VidmineError
from .grouping import agglomerate, query_shots
from .keyframes import select_keyframes, shot_descriptor
from .lsclust import ALGORITHMS, LscConfig, cluster
from .pipeline import (
    FORMATS,
    PipelineConfig,
    clusters_report,
    descriptors_report,
    dumps,
    frame_query_descriptor,
    groups_report,
    ingest,
    keyframes_report,
    load_descriptors,
    query_report,
    run_pipeline,
    shots_report,
    write_reports,
)
from .shots import CutPolicy, build_shots, consecutive_distances, detect_cuts

log = logging.getLogger("vidmine")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _frames_args(p):
    p.add_argument("--input", required=True, help="frame directory or JSON Lines feature file")
    p.add_argument("--format", choices=FORMATS, default="ppm-dir")
    p.add_argument("--bins", type=int, default=None,
                   help="histogram bins per channel (default 16; inferred for features-jsonl)")
    p.add_argument("--cut-mode", choices=("fixed", "adaptive"), default="fixed")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=3.0)
    p.add_argument("--workers", type=int, default=1)


def _cluster_args(p):
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--algo", choices=ALGORITHMS, default="kmeans-then-lsc")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=1)


def _group_args(p):
    p.add_argument("--groups", type=int, default=None, help="stop when this many groups remain")
    p.add_argument("--floor", type=float, default=None,
                   help="stop when the best average similarity falls below this")


def build_parser():
    parser = _Parser(prog="vidmine", description="Shot detection, clustering and retrieval.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect-shots", help="write shots.json")
    _frames_args(p)
    p.add_argument("--out", help="output directory (default: print to stdout)")

    p = sub.add_parser("keyframes", help="write keyframes.json and descriptors.json")
    _frames_args(p)
    p.add_argument("--out", help="output directory (default: print to stdout)")

    p = sub.add_parser("cluster", help="cluster a descriptors.json file")
    p.add_argument("--input", required=True, help="descriptors.json")
    _cluster_args(p)
    p.add_argument("--out", help="output directory (default: print to stdout)")

    p = sub.add_parser("group", help="agglomerate a descriptors.json file")
    p.add_argument("--input", required=True, help="descriptors.json")
    _group_args(p)
    p.add_argument("--out", help="output directory (default: print to stdout)")

    p = sub.add_parser("query", help="rank shots against an example frame or shot")
    p.add_argument("--input", required=True, help="descriptors.json")
    q = p.add_mutually_exclusive_group(required=True)
    q.add_argument("--frame", help="PPM image to use as the query")
    q.add_argument("--shot", type=int, help="id of a shot to use as the query")
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--out", help="output directory (default: print to stdout)")

    p = sub.add_parser("pipeline", help="run every stage and write all reports")
    _frames_args(p)
    _cluster_args(p)
    _group_args(p)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _emit(reports, out):
    if out is None:
        for obj in reports.values():
            sys.stdout.write(dumps(obj))
    else:
        for path in write_reports(reports, out):
            log.info("wrote %s", path)


def _segment(args):
    policy = CutPolicy(args.cut_mode, args.tau, args.alpha)
    hists = ingest(args.input, args.format, args.bins, args.workers)
    shots = build_shots(len(hists), detect_cuts(consecutive_distances(hists), policy))
    return hists, policy, shots


def cmd_detect_shots(args):
    hists, policy, shots = _segment(args)
    _emit({"shots.json": shots_report(len(hists), policy, shots)}, args.out)


def cmd_keyframes(args):
    hists, _, shots = _segment(args)
    triples = [select_keyframes(s) for s in shots]
    X = np.stack([shot_descriptor(t, hists) for t in triples])
    _emit({
        "keyframes.json": keyframes_report(shots, triples),
        "descriptors.json": descriptors_report(X, hists[0].bins_per_channel),
    }, args.out)


def cmd_cluster(args):
    _, X, _ = load_descriptors(args.input)
    if X.shape[0] < args.k:
        raise ConfigError(f"only {X.shape[0]} descriptors but k={args.k}; reduce K")
    p = cluster(X, args.k, args.algo, LscConfig(seed=args.seed, restarts=args.restarts))
    _emit({"clusters.json": clusters_report(p)}, args.out)


def cmd_group(args):
    _, X, _ = load_descriptors(args.input)
    dendro, labels = agglomerate(X, args.groups, args.floor)
    _emit({"groups.json": groups_report(dendro, labels)}, args.out)


def cmd_query(args):
    ids, X, bins = load_descriptors(args.input)
    if args.frame is not None:
        if bins is None:
            raise ConfigError("descriptors file has no bins_per_channel; cannot query by frame")
        q = frame_query_descriptor(args.frame, bins)
        label = f"frame:{args.frame}"
    else:
        if args.shot not in ids:
            raise ConfigError(f"no shot with id {args.shot}")
        q = X[ids.index(args.shot)]
        label = f"shot:{args.shot}"
    results = [(ids[i], s) for i, s in query_shots(q, X, args.top_k)]
    _emit({"query.json": query_report(label, results)}, args.out)


def cmd_pipeline(args):
    cfg = PipelineConfig(
        input=args.input, format=args.format, bins=args.bins, cut_mode=args.cut_mode,
        tau=args.tau, alpha=args.alpha, k=args.k, algorithm=args.algo, seed=args.seed,
        restarts=args.restarts, group_count=args.groups, group_floor=args.floor,
        out=args.out, workers=args.workers,
    )
    result = run_pipeline(cfg)
    log.info("%d frames, %d shots, objective %.6f", result.num_frames, len(result.shots),
             result.reports()["clusters.json"]["objective"])


COMMANDS = {
    "detect-shots": cmd_detect_shots,
    "keyframes": cmd_keyframes,
    "cluster": cmd_cluster,
    "group": cmd_group,
    "query": cmd_query,
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except VidmineError as e:
        print(f"vidmine: error: {e}", file=sys.stderr)
        return e.exit_code
    except LookupError as e:
        print(f"vidmine: error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # anything else is a bug
        print(f"vidmine: internal error: {e!r}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
