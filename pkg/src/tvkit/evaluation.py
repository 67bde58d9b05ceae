"""Speaker-independent splits, PPMC scoring of predicted TV tracks, report
aggregation and plot-data emission.

Sentinel policy: frames where either the prediction or the truth is NaN
are dropped pairwise before correlating, mirroring standard practice
with mistracked articulometry frames.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .artic_io import TV_NAMES, TvTrack, _fmt

__all__ = [
    "SplitSpec",
    "PpmcReport",
    "ppmc",
    "evaluate_tracks",
    "improvement",
    "make_split",
    "emit_plot_data",
    "write_report",
    "read_report",
]

DATASET_TAGS = ("small", "extended", "other")
EVAL_MODES = ("concatenated", "per-utterance-mean")


@dataclass(frozen=True)
class SplitSpec:
    """Disjoint speaker partitions for train/dev/test."""

    train: frozenset[str]
    dev: frozenset[str]
    test: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "train", frozenset(self.train))
        object.__setattr__(self, "dev", frozenset(self.dev))
        object.__setattr__(self, "test", frozenset(self.test))
        for name, part in (("train", self.train), ("dev", self.dev),
                           ("test", self.test)):
            if not part:
                raise ValueError(f"{name} partition is empty")
        if (self.train & self.dev) or (self.train & self.test) \
                or (self.dev & self.test):
            raise ValueError("partitions must be pairwise disjoint")

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(
            {k: sorted(getattr(self, k)) for k in ("train", "dev", "test")},
            indent=2) + "\n")

    @classmethod
    def from_json(cls, path) -> "SplitSpec":
        raw = json.loads(Path(path).read_text())
        return cls(frozenset(raw["train"]), frozenset(raw["dev"]),
                   frozenset(raw["test"]))


@dataclass(frozen=True)
class PpmcReport:
    """Per-TV correlation scores plus their mean for one condition."""

    variant: str
    dataset_tag: str
    feature_kind: str
    scores: dict[str, float]
    average: float = field(default=math.nan)

    def __post_init__(self):
        if self.variant not in ("baseline", "proposed"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.dataset_tag not in DATASET_TAGS:
            raise ValueError(f"dataset_tag must be one of {DATASET_TAGS}")
        if set(self.scores) != set(TV_NAMES):
            raise ValueError(f"scores must cover exactly {TV_NAMES}")
        scores = {k: float(self.scores[k]) for k in TV_NAMES}
        for k, v in scores.items():
            if not (-1.0 <= v <= 1.0):
                raise ValueError(f"score {k}={v} outside [-1, 1]")
        object.__setattr__(self, "scores", scores)
        mean = sum(scores.values()) / len(scores)
        if math.isnan(self.average):
            object.__setattr__(self, "average", mean)
        elif abs(self.average - mean) > 1e-6:
            raise ValueError(
                f"average {self.average} does not match the mean of the "
                f"scores ({mean})")


def write_report(report: PpmcReport, path) -> None:
    Path(path).write_text(json.dumps({
        "variant": report.variant,
        "dataset": report.dataset_tag,
        "feature_kind": report.feature_kind,
        "scores": report.scores,
        "average": report.average,
    }, indent=2) + "\n")


def read_report(path) -> PpmcReport:
    raw = json.loads(Path(path).read_text())
    return PpmcReport(raw["variant"], raw["dataset"], raw["feature_kind"],
                      raw["scores"], float(raw["average"]))


def ppmc(x, y) -> float:
    """Pearson product-moment correlation with pairwise NaN deletion."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"need equal-length 1-D sequences, "
                         f"got {x.shape} vs {y.shape}")
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    if x.size < 2:
        raise ValueError(f"only {x.size} non-sentinel pairs, need >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(dx @ dx)
    sy = float(dy @ dy)
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation undefined for a constant sequence")
    r = float(dx @ dy) / math.sqrt(sx * sy)
    return min(1.0, max(-1.0, r))


def _index(tracks) -> dict[tuple[str, str], TvTrack]:
    out = {}
    for t in tracks:
        key = (t.speaker_id, t.utterance_id)
        if key in out:
            raise ValueError(f"duplicate track for {key}")
        out[key] = t
    return out


def evaluate_tracks(pred, truth, mode: str = "concatenated",
                    dataset_tag: str = "other",
                    feature_kind: str = "mfcc13") -> PpmcReport:
    """Per-TV PPMC between matching (speaker, utterance) track pairs.

    ``concatenated`` correlates all test frames at once; the alternative
    averages one score per utterance.
    """
    if mode not in EVAL_MODES:
        raise ValueError(f"mode must be one of {EVAL_MODES}")
    p = _index(pred)
    t = _index(truth)
    if set(p) != set(t):
        missing = sorted(set(t) - set(p))
        extra = sorted(set(p) - set(t))
        raise ValueError(f"key mismatch: missing from predictions {missing}, "
                         f"unmatched predictions {extra}")
    if not p:
        raise ValueError("no track pairs to evaluate")
    for key in sorted(p):
        if p[key].n_frames != t[key].n_frames:
            raise ValueError(
                f"length mismatch for {key}: predicted {p[key].n_frames} "
                f"frames, truth {t[key].n_frames}")
    variants = {trk.variant for trk in p.values()}
    variant = variants.pop() if len(variants) == 1 else "proposed"
    keys = sorted(p)
    scores = {}
    for ch, name in enumerate(TV_NAMES):
        if mode == "concatenated":
            xs = np.concatenate([p[k].values[:, ch] for k in keys])
            ys = np.concatenate([t[k].values[:, ch] for k in keys])
            scores[name] = ppmc(xs, ys)
        else:
            per = [ppmc(p[k].values[:, ch], t[k].values[:, ch]) for k in keys]
            scores[name] = float(np.mean(per))
    return PpmcReport(variant, dataset_tag, feature_kind, scores)


def improvement(a: PpmcReport, b: PpmcReport) -> float:
    """Average-PPMC gain from report a to report b, in percentage points."""
    if set(a.scores) != set(b.scores):
        raise ValueError("reports cover different TV sets")
    return (b.average - a.average) * 100.0


def make_split(speakers, seed: int, dev_males: int = 3, dev_females: int = 2,
               test_males: int = 3, test_females: int = 2) -> SplitSpec:
    """Deterministic speaker-independent split.

    ``speakers`` is a sequence of (id, sex) with sex 'M' or 'F'. Dev and
    test receive the requested sex quotas (paper shape 3M/2F each);
    everyone else trains.
    """
    import random

    ids = [s for s, _ in speakers]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate speaker ids")
    males = sorted(s for s, sex in speakers if sex == "M")
    females = sorted(s for s, sex in speakers if sex == "F")
    if len(males) + len(females) != len(speakers):
        raise ValueError("speaker sex labels must be 'M' or 'F'")
    need_m = dev_males + test_males
    need_f = dev_females + test_females
    if len(males) < need_m or len(females) < need_f:
        raise ValueError(
            f"cannot satisfy {dev_males}M/{dev_females}F dev and "
            f"{test_males}M/{test_females}F test quotas with "
            f"{len(males)}M/{len(females)}F speakers")
    if len(speakers) - need_m - need_f < 1:
        raise ValueError("no speakers left for the training partition")
    rng = random.Random(seed)
    rng.shuffle(males)
    rng.shuffle(females)
    dev = set(males[:dev_males]) | set(females[:dev_females])
    test = set(males[dev_males:need_m]) | set(females[dev_females:need_f])
    train = set(ids) - dev - test
    return SplitSpec(frozenset(train), frozenset(dev), frozenset(test))


def emit_plot_data(pred: TvTrack, truth: TvTrack, path) -> None:
    """CSV of truth and prediction trajectories for external plotting.

    Columns: t, the six truth TVs, then the six predicted TVs. Sentinel
    cells are emitted as empty fields.
    """
    if pred.n_frames != truth.n_frames:
        raise ValueError(f"length mismatch: predicted {pred.n_frames} frames, "
                         f"truth {truth.n_frames}")

    def cell(v: float) -> str:
        return _fmt(v) if math.isfinite(v) else ""

    header = "t," + ",".join(f"{n}_truth" for n in TV_NAMES) \
        + "," + ",".join(f"{n}_pred" for n in TV_NAMES)
    lines = [header]
    for i, t in enumerate(truth.times):
        row = [_fmt(t)]
        row += [cell(v) for v in truth.values[i]]
        row += [cell(v) for v in pred.values[i]]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")
