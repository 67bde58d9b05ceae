"""Command-line entry point: synth, transform, featurize, split, evaluate,
compare, plot-data.

All randomness flows from explicit --seed flags; outputs carry no
timestamps, so every command is byte-idempotent for identical inputs.
Exit codes: 0 success, 2 validation failure, 3 I/O failure. Logs go to
stderr, data to files only.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import evaluation, features, synth
from .artic_io import (FormatError, read_feature_matrix, read_palatal_trace,
                       read_pellet_track, read_tv_track, write_feature_matrix,
                       write_tv_track)
from .geometry import extend_palatal_trace
from .tract_variables import TvConfig, compute_tv_track

log = logging.getLogger("tvkit")


class ValidationError(ValueError):
    pass


def _load_config(args: argparse.Namespace) -> None:
    """Apply a JSON config file; its values override command-line flags."""
    if not getattr(args, "config", None):
        return
    raw = json.loads(Path(args.config).read_text())
    if not isinstance(raw, dict):
        raise ValidationError(f"{args.config}: config must be a JSON object")
    for key, value in raw.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ValidationError(f"{args.config}: unknown config key {key!r}")
        setattr(args, dest, value)


def _utterances(manifest: dict):
    return sorted(manifest["utterances"],
                  key=lambda u: (u["speaker"], u["utterance"]))


def _manifest(path) -> tuple[dict, Path]:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"manifest not found: {p}")
    return synth.read_manifest(p), p.parent


def cmd_synth(args) -> int:
    cfg = synth.SynthConfig(
        seed=args.seed, n_speakers=args.speakers,
        utterances_per_speaker=args.utterances, duration_s=args.duration,
        pellet_rate_hz=args.rate, mistrack_prob=args.mistrack_prob)
    manifest = synth.synth_corpus(cfg, args.out)
    log.info("wrote %d utterances from %d speakers under %s",
             len(manifest["utterances"]), len(manifest["speakers"]), args.out)
    return 0


def _load_palates(manifest: dict, root: Path, args) -> dict:
    palates = {}
    problems = []
    for spk in manifest["speakers"]:
        path = root / spk["palate"]
        if not path.is_file():
            problems.append(f"speaker {spk['id']}: palate file missing ({path})")
            continue
        trace = read_palatal_trace(path)
        if args.extend_palate:
            if trace.extended:
                problems.append(f"speaker {spk['id']}: palate already extended; "
                                "drop --extend-palate")
                continue
            if args.wall_x is None:
                raise ValidationError("--extend-palate requires --wall-x")
            trace = extend_palatal_trace(trace, args.wall_x, args.wall_step,
                                         args.wall_drop)
        palates[spk["id"]] = trace
    if problems:
        raise ValidationError("\n".join(problems))
    return palates


def cmd_transform(args) -> int:
    manifest, root = _manifest(args.manifest)
    palates = _load_palates(manifest, root, args)
    cfg = TvConfig(variant=args.variant, resolution_mm=args.resolution,
                   collinear_policy=args.collinear_policy)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    problems = []
    for utt in _utterances(manifest):
        spk = utt["speaker"]
        if spk not in palates:
            problems.append(f"speaker {spk}: not listed in manifest speakers")
            continue
        try:
            track = read_pellet_track(root / utt["pellets"])
            tv = compute_tv_track(track, palates[spk], cfg)
        except (FormatError, ValueError, FileNotFoundError) as exc:
            problems.append(f"{utt['pellets']}: {exc}")
            continue
        write_tv_track(tv, out / f"{spk}_{utt['utterance']}.tv.csv")
    if problems:
        raise ValidationError("\n".join(problems))
    log.info("transformed %d utterances (variant=%s)",
             len(manifest["utterances"]), args.variant)
    return 0


def cmd_featurize(args) -> int:
    manifest, root = _manifest(args.manifest)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    problems = []
    for utt in _utterances(manifest):
        key = f"{utt['speaker']}_{utt['utterance']}"
        try:
            if args.kind == "mfcc":
                clip = features.read_wav(root / utt["audio"], utt["speaker"],
                                         utt["utterance"])
                matrix = features.znormalize(features.extract_mfcc(clip))
                segments = features.segment_2s(matrix)
                matrix = features.FeatureMatrix(
                    matrix.kind, matrix.rate_hz,
                    np.concatenate([s.data for s in segments]))
            else:
                src = Path(args.ssl_dir) / f"{key}.ftm"
                matrix = features.validate_ssl_matrix(read_feature_matrix(src))
        except (FormatError, ValueError, FileNotFoundError) as exc:
            problems.append(f"{key}: {exc}")
            continue
        write_feature_matrix(matrix, out / f"{key}.ftm")
    if problems:
        raise ValidationError("\n".join(problems))
    log.info("featurized %d utterances (kind=%s)",
             len(manifest["utterances"]), args.kind)
    return 0


def cmd_split(args) -> int:
    manifest, _ = _manifest(args.manifest)
    speakers = sorted((s["id"], s["sex"]) for s in manifest["speakers"])
    spec = evaluation.make_split(
        speakers, args.seed, dev_males=args.dev_males,
        dev_females=args.dev_females, test_males=args.test_males,
        test_females=args.test_females)
    spec.to_json(args.out)
    log.info("split %d speakers into %d/%d/%d", len(speakers),
             len(spec.train), len(spec.dev), len(spec.test))
    return 0


def _load_tv_dir(path) -> list:
    p = Path(path)
    if not p.is_dir():
        raise ValidationError(f"not a directory: {p}")
    files = sorted(p.glob("*.tv.csv"))
    if not files:
        raise ValidationError(f"no *.tv.csv files under {p}")
    return [read_tv_track(f) for f in files]


def cmd_evaluate(args) -> int:
    pred = _load_tv_dir(args.pred)
    truth = _load_tv_dir(args.truth)
    report = evaluation.evaluate_tracks(
        pred, truth, mode=args.mode, dataset_tag=args.dataset_tag,
        feature_kind=args.feature_kind)
    evaluation.write_report(report, args.out)
    names = list(report.scores) + ["Average"]
    values = [report.scores[n] for n in report.scores] + [report.average]
    print("  ".join(f"{n}={v:.4f}" for n, v in zip(names, values)))
    return 0


def cmd_compare(args) -> int:
    base = evaluation.read_report(args.baseline)
    new = evaluation.read_report(args.new)
    delta = evaluation.improvement(base, new)
    print(f"{delta:.1f}")
    return 0


def cmd_plot_data(args) -> int:
    pred = read_tv_track(args.pred)
    truth = read_tv_track(args.truth)
    evaluation.emit_plot_data(pred, truth, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvkit",
        description="Tract-variable toolkit: synthesize oracle corpora, "
                    "transform pellet trajectories to TVs, featurize audio, "
                    "split speakers, and evaluate predictions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON config file; its values "
                                        "override command-line flags")
        return p

    p = add("synth", cmd_synth, "generate a synthetic oracle corpus")
    p.add_argument("--out", required=True, help="corpus output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--speakers", type=int, default=4)
    p.add_argument("--utterances", type=int, default=3,
                   help="utterances per speaker")
    p.add_argument("--duration", type=float, default=5.0,
                   help="utterance duration, seconds")
    p.add_argument("--rate", type=float, default=145.0,
                   help="pellet sampling rate, Hz")
    p.add_argument("--mistrack-prob", type=float, default=0.0,
                   help="per-pellet probability of sentinel injection")

    p = add("transform", cmd_transform,
            "derive TV tracks from pellet trajectories")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="TV output directory")
    p.add_argument("--variant", choices=["baseline", "proposed"],
                   default="proposed")
    p.add_argument("--resolution", type=float, default=0.05,
                   help="palate resampling resolution, mm")
    p.add_argument("--collinear-policy",
                   choices=["emit-sentinel", "polyline-fallback"],
                   default="polyline-fallback")
    p.add_argument("--extend-palate", action="store_true",
                   help="extend raw palate traces before transforming")
    p.add_argument("--wall-x", type=float, default=None,
                   help="pharyngeal wall x, mm (with --extend-palate)")
    p.add_argument("--wall-drop", type=float, default=30.0,
                   help="pharyngeal wall descent, mm")
    p.add_argument("--wall-step", type=float, default=0.5,
                   help="extension sampling step, mm")

    p = add("featurize", cmd_featurize, "produce model-ready feature files")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="feature output directory")
    p.add_argument("--kind", choices=["mfcc", "ssl"], required=True)
    p.add_argument("--ssl-dir", default=None,
                   help="directory of SSL .ftm files to validate and ingest")

    p = add("split", cmd_split, "speaker-independent train/dev/test split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="split JSON path")
    p.add_argument("--dev-males", type=int, default=3)
    p.add_argument("--dev-females", type=int, default=2)
    p.add_argument("--test-males", type=int, default=3)
    p.add_argument("--test-females", type=int, default=2)

    p = add("evaluate", cmd_evaluate, "PPMC report for predicted TV tracks")
    p.add_argument("--pred", required=True, help="directory of predictions")
    p.add_argument("--truth", required=True, help="directory of ground truth")
    p.add_argument("--mode", choices=list(evaluation.EVAL_MODES),
                   default="concatenated")
    p.add_argument("--dataset-tag", choices=list(evaluation.DATASET_TAGS),
                   default="other")
    p.add_argument("--feature-kind", choices=["mfcc13", "ssl1024"],
                   default="mfcc13")
    p.add_argument("--out", required=True, help="report JSON path")

    p = add("compare", cmd_compare,
            "percentage-point delta between two reports")
    p.add_argument("--baseline", required=True, help="baseline report JSON")
    p.add_argument("--new", required=True, help="new report JSON")

    p = add("plot-data", cmd_plot_data,
            "truth/prediction overlay CSV for external plotting")
    p.add_argument("--pred", required=True, help="predicted TV CSV")
    p.add_argument("--truth", required=True, help="ground-truth TV CSV")
    p.add_argument("--out", required=True, help="output CSV path")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _load_config(args)
        return args.func(args)
    except (ValidationError, FormatError, ValueError, AssertionError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
