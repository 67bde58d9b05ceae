"""Synthetic speakers and utterances with analytically known TVs.

Pellets follow smooth parametric trajectories built so that every TV has
a closed form:

* the lower lip is placed against the upper lip so that lip aperture and
  the lower-lip x are prescribed sinusoids;
* T1 sits at a prescribed distance along the inward normal of one palate
  segment, making the tongue-tip distance exact by construction;
* T2/T3/T4 are placed on a circle of controlled center and radius whose
  center sits on the inward normal of another palate segment, making the
  tongue-body gap and its witness point exact.

Construction assumptions (the anchored palate segment is the globally
nearest part of the extended trace) are verified per frame against
shapely's independent distance computation, so a generated corpus is a
trustworthy oracle for the whole transformation pipeline.

Paired audio is a sum of tones whose frequencies and amplitudes are
affine in the analytic TVs, giving a deterministic, smooth, learnable
acoustics-to-TV mapping.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .artic_io import (PalatalTrace, PelletId, PelletTrack, TvTrack,
                       write_palatal_trace, write_pellet_track, write_tv_track)
from .features import REQUIRED_SAMPLE_RATE, AudioClip, write_wav
from .geometry import extend_palatal_trace

__all__ = ["SynthConfig", "SynthSpeaker", "synth_speaker", "synth_utterance",
           "synth_corpus", "read_manifest"]

log = logging.getLogger(__name__)

#: per-signal (offset_lo, offset_hi, amp_lo, amp_hi) draws, mm.
#: the tongue-body circle center must stay well inside the palate arc's
#: radius of curvature (>= 35 mm for the palate ranges below), or the
#: anchored segment would stop being its nearest point
DEFAULT_MOTION_PARAMS = {
    "la": (9.0, 13.0, 2.0, 3.5),
    "lp_rel": (-1.5, 1.5, 1.0, 2.5),   # lower-lip x relative to the upper lip
    "ttcd": (3.5, 5.0, 1.0, 2.0),
    "tbcd": (3.0, 4.5, 0.8, 1.5),
    "radius": (14.0, 17.0, 0.8, 1.5),
}

#: tone carrier bands (Hz) per TV, low edge / high edge
TONE_BANDS = {
    "LA": (350.0, 800.0),
    "LP": (950.0, 1400.0),
    "TBCL": (1550.0, 2000.0),
    "TBCD": (2150.0, 2700.0),
    "TTCL": (2900.0, 3500.0),
    "TTCD": (3700.0, 4400.0),
}

#: smallest tolerated clearance before a motion draw is clipped, mm
MIN_CLEARANCE_MM = 0.5


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_speakers: int = 4
    utterances_per_speaker: int = 3
    duration_s: float = 5.0
    pellet_rate_hz: float = 145.0
    # palate_shape_params: arc length, base height, curvature (dome amplitude)
    palate_length_range: tuple[float, float] = (42.0, 50.0)
    palate_height_range: tuple[float, float] = (4.0, 7.0)
    palate_curvature_range: tuple[float, float] = (3.0, 5.0)
    motion_freq_range: tuple[float, float] = (0.5, 2.5)
    motion_params: dict = field(default_factory=lambda: dict(DEFAULT_MOTION_PARAMS))
    audio_mapping: str = "tv-to-formant-tones"
    mistrack_prob: float = 0.0
    # palatal extension applied before TV derivation
    wall_margin_mm: float = 12.0
    wall_drop_mm: float = 30.0
    wall_step_mm: float = 0.5

    def __post_init__(self):
        if self.n_speakers <= 0 or self.utterances_per_speaker <= 0:
            raise ValueError("speaker and utterance counts must be positive")
        if self.duration_s <= 0 or self.pellet_rate_hz <= 0:
            raise ValueError("duration and pellet rate must be positive")
        if not 0.0 <= self.mistrack_prob < 1.0:
            raise ValueError("mistrack_prob must be in [0, 1)")
        if self.audio_mapping != "tv-to-formant-tones":
            raise ValueError(f"unknown audio mapping {self.audio_mapping!r}")


@dataclass(frozen=True)
class _Sine:
    offset: float
    amp: float
    freq: float
    phase: float

    def __call__(self, t):
        return self.offset + self.amp * np.sin(
            2.0 * np.pi * self.freq * t + self.phase)

    @property
    def lo(self) -> float:
        return self.offset - self.amp

    @property
    def hi(self) -> float:
        return self.offset + self.amp


def _draw_sine(rng, motion_params, name, freq_range) -> _Sine:
    off_lo, off_hi, amp_lo, amp_hi = motion_params[name]
    return _Sine(offset=float(rng.uniform(off_lo, off_hi)),
                 amp=float(rng.uniform(amp_lo, amp_hi)),
                 freq=float(rng.uniform(*freq_range)),
                 phase=float(rng.uniform(0.0, 2.0 * np.pi)))


@dataclass(frozen=True)
class SynthSpeaker:
    """A generated palate plus the anatomy parameters of one speaker."""

    index: int
    speaker_id: str
    sex: str
    palate: PalatalTrace            # raw hard-palate arc, extended=False
    epal: PalatalTrace              # extended to the pharyngeal wall
    ul_rest: tuple[float, float]
    tip_foot: tuple[float, float]   # anchor on the palate for T1
    tip_normal: tuple[float, float]
    body_foot: tuple[float, float]  # anchor for the tongue-body circle
    body_normal: tuple[float, float]
    pellet_angles: tuple[float, float, float]
    mani_rest: tuple[float, float]
    manm_rest: tuple[float, float]


def _segment_anchor(points: np.ndarray, seg: int):
    """Midpoint and inward (downward) unit normal of palate segment seg."""
    a = points[seg]
    b = points[seg + 1]
    mid = (a + b) / 2.0
    ux, uy = (b - a) / math.hypot(*(b - a))
    nx, ny = -uy, ux
    if ny > 0:  # cavity is below the palate
        nx, ny = -nx, -ny
    return (float(mid[0]), float(mid[1])), (float(nx), float(ny))


def synth_speaker(cfg: SynthConfig, speaker_index: int) -> SynthSpeaker:
    """Deterministic per (seed, index): a concave-down palate arc in the
    occlusal frame plus perturbed pellet rest positions."""
    if speaker_index >= cfg.n_speakers:
        raise ValueError(f"speaker index {speaker_index} out of range")
    rng = np.random.default_rng([cfg.seed, 101, speaker_index])
    x_front = float(rng.uniform(-2.0, 0.0))
    length = float(rng.uniform(*cfg.palate_length_range))
    h0 = float(rng.uniform(*cfg.palate_height_range))
    dome = float(rng.uniform(*cfg.palate_curvature_range))
    xs = np.linspace(x_front, x_front - length, 31)
    s = (xs - x_front) / (-length)
    ys = h0 + dome * np.sin(np.pi * s)
    palate = PalatalTrace(f"S{speaker_index:02d}",
                          np.stack([xs, ys], axis=1), extended=False)
    epal = extend_palatal_trace(palate, wall_x=xs[-1] - cfg.wall_margin_mm,
                                step_mm=cfg.wall_step_mm,
                                wall_drop_mm=cfg.wall_drop_mm)
    tip_seg = int(rng.integers(4, 9))
    body_seg = int(rng.integers(12, 15))  # mid-dome, clear of wall and edges
    tip_foot, tip_normal = _segment_anchor(palate.points, tip_seg)
    body_foot, body_normal = _segment_anchor(palate.points, body_seg)
    # tongue pellets spread around the circle point facing the anchor
    bearing = math.atan2(-body_normal[1], -body_normal[0])
    jitter = float(rng.uniform(-0.15, 0.15))
    spread = float(rng.uniform(0.75, 1.0))
    angles = (bearing - spread + jitter, bearing + jitter,
              bearing + spread + jitter)
    return SynthSpeaker(
        index=speaker_index,
        speaker_id=palate.speaker_id,
        sex="M" if speaker_index % 2 == 0 else "F",
        palate=palate,
        epal=epal,
        ul_rest=(float(rng.uniform(-2.0, 1.0)), float(rng.uniform(1.5, 3.0))),
        tip_foot=tip_foot,
        tip_normal=tip_normal,
        body_foot=body_foot,
        body_normal=body_normal,
        pellet_angles=angles,
        mani_rest=(float(rng.uniform(-6.0, -2.0)),
                   float(rng.uniform(-28.0, -22.0))),
        manm_rest=(float(rng.uniform(-38.0, -30.0)),
                   float(rng.uniform(-26.0, -20.0))),
    )


def _assert_anchor_nearest(epal: PalatalTrace, pxs, pys, expected, what: str):
    """Verify, with shapely as an independent geometric authority, that the
    anchored palate segment really is the globally nearest one."""
    import shapely

    line = shapely.LineString(epal.points)
    d = shapely.distance(shapely.points(np.stack([pxs, pys], axis=1)), line)
    err = np.abs(d - expected)
    if err.max() > 1e-6:
        i = int(np.argmax(err))
        raise AssertionError(
            f"synthetic construction broken for {what}: frame {i} expected "
            f"distance {expected[i]:.6f} mm but the palate is "
            f"{d[i]:.6f} mm away")


def _tv_channels(speaker: SynthSpeaker, sines: dict) -> dict:
    """Closed-form TV signals as callables over a time array."""
    tfx, _ = speaker.tip_foot
    tnx, _ = speaker.tip_normal
    bfx, _ = speaker.body_foot
    bnx, _ = speaker.body_normal
    la, lp, d1, g = sines["la"], sines["lp"], sines["ttcd"], sines["tbcd"]
    return {
        "LA": la,
        "LP": lp,
        "TBCL": lambda t: -(bfx + g(t) * bnx),
        "TBCD": g,
        "TTCL": lambda t: -(tfx + d1(t) * tnx),
        "TTCD": d1,
    }


def _channel_ranges(speaker: SynthSpeaker, sines: dict) -> dict:
    chans = _tv_channels(speaker, sines)
    out = {}
    for name in ("LA", "LP", "TBCD", "TTCD"):
        s = sines[{"LA": "la", "LP": "lp", "TBCD": "tbcd", "TTCD": "ttcd"}[name]]
        out[name] = (s.lo, s.hi)
    for name in ("TBCL", "TTCL"):
        ends = [float(chans[name](np.array([tval]))[0]) for tval in (0.0,)]
        # the channel is affine in its driving sine; take its extremes
        drive = sines["tbcd"] if name == "TBCL" else sines["ttcd"]
        nx = speaker.body_normal[0] if name == "TBCL" else speaker.tip_normal[0]
        fx = speaker.body_foot[0] if name == "TBCL" else speaker.tip_foot[0]
        vals = sorted([-(fx + drive.lo * nx), -(fx + drive.hi * nx)])
        out[name] = (vals[0], vals[1])
    return out


def _tone_audio(speaker: SynthSpeaker, sines: dict, duration_s: float) -> np.ndarray:
    fs = REQUIRED_SAMPLE_RATE
    t = np.arange(round(duration_s * fs)) / fs
    chans = _tv_channels(speaker, sines)
    ranges = _channel_ranges(speaker, sines)
    mix = np.zeros_like(t)
    for name, (f_lo, f_hi) in TONE_BANDS.items():
        lo, hi = ranges[name]
        span = hi - lo
        frac = (chans[name](t) - lo) / span if span > 0 else np.full_like(t, 0.5)
        freq = f_lo + (f_hi - f_lo) * frac
        phase = 2.0 * np.pi * np.cumsum(freq) / fs
        mix += (0.055 + 0.095 * frac) * np.sin(phase)
    return mix


def synth_utterance(cfg: SynthConfig, speaker: SynthSpeaker,
                    utterance_index: int):
    """One utterance: (PelletTrack, analytic TvTrack, AudioClip).

    The TvTrack is ground truth by construction; motion draws that would
    bring an articulator closer than MIN_CLEARANCE_MM to the palate are
    clipped and reported through the module logger.
    """
    if utterance_index >= cfg.utterances_per_speaker:
        raise ValueError(f"utterance index {utterance_index} out of range")
    rng = np.random.default_rng(
        [cfg.seed, 202, speaker.index, utterance_index])
    n = round(cfg.duration_s * cfg.pellet_rate_hz)
    t = np.arange(n) / cfg.pellet_rate_hz

    sines = {name: _draw_sine(rng, cfg.motion_params, name,
                              cfg.motion_freq_range)
             for name in ("la", "lp_rel", "ttcd", "tbcd", "radius")}
    for name in ("ttcd", "tbcd"):
        s = sines[name]
        if s.lo < MIN_CLEARANCE_MM:
            clipped = _Sine(s.offset, max(0.0, s.offset - MIN_CLEARANCE_MM),
                            s.freq, s.phase)
            log.warning("clipped %s amplitude %.3f -> %.3f for %s/U%02d to "
                        "keep %.1f mm palate clearance", name, s.amp,
                        clipped.amp, speaker.speaker_id, utterance_index,
                        MIN_CLEARANCE_MM)
            sines[name] = clipped
    # small upper-lip wobble; the lower-lip x rides on it
    wob = _Sine(0.0, float(rng.uniform(0.2, 0.4)),
                float(rng.uniform(*cfg.motion_freq_range)),
                float(rng.uniform(0.0, 2.0 * np.pi)))
    rel = sines.pop("lp_rel")
    ulx0, uly0 = speaker.ul_rest
    sines["lp"] = _Sine(ulx0 + rel.offset, rel.amp, rel.freq, rel.phase)

    la = sines["la"](t)
    llx = sines["lp"](t)
    ulx = ulx0 + wob(t)
    uly = uly0 + 0.75 * wob(t)
    lly = uly - np.sqrt(la ** 2 - (ulx - llx) ** 2)

    d1 = sines["ttcd"](t)
    tfx, tfy = speaker.tip_foot
    tnx, tny = speaker.tip_normal
    t1x = tfx + d1 * tnx
    t1y = tfy + d1 * tny

    g = sines["tbcd"](t)
    radius = sines["radius"](t)
    bfx, bfy = speaker.body_foot
    bnx, bny = speaker.body_normal
    ccx = bfx + (radius + g) * bnx
    ccy = bfy + (radius + g) * bny

    pos = np.empty((n, 8, 2))
    pos[:, PelletId.UL.value] = np.stack([ulx, uly], axis=1)
    pos[:, PelletId.LL.value] = np.stack([llx, lly], axis=1)
    pos[:, PelletId.T1.value] = np.stack([t1x, t1y], axis=1)
    for pellet, angle in zip((PelletId.T2, PelletId.T3, PelletId.T4),
                             speaker.pellet_angles):
        pos[:, pellet.value, 0] = ccx + radius * math.cos(angle)
        pos[:, pellet.value, 1] = ccy + radius * math.sin(angle)
    jaw = 0.12 * (la - sines["la"].offset)
    pos[:, PelletId.MANi.value, 0] = speaker.mani_rest[0] + 0.3 * wob(t)
    pos[:, PelletId.MANi.value, 1] = speaker.mani_rest[1] - jaw
    pos[:, PelletId.MANm.value, 0] = speaker.manm_rest[0] + 0.15 * wob(t)
    pos[:, PelletId.MANm.value, 1] = speaker.manm_rest[1] - 0.6 * jaw

    _assert_anchor_nearest(speaker.epal, t1x, t1y, d1, "tongue tip")
    _assert_anchor_nearest(speaker.epal, ccx, ccy, radius + g,
                           "tongue-body circle center")

    chans = _tv_channels(speaker, sines)
    values = np.stack([chans[name](t) for name in
                       ("LA", "LP", "TBCL", "TBCD", "TTCL", "TTCD")], axis=1)

    if cfg.mistrack_prob > 0.0:
        lost = rng.random((n, 8)) < cfg.mistrack_prob
        pos[lost] = np.nan
        dep = {
            "LA": (PelletId.UL, PelletId.LL),
            "LP": (PelletId.LL,),
            "TBCL": (PelletId.T2, PelletId.T3, PelletId.T4),
            "TBCD": (PelletId.T2, PelletId.T3, PelletId.T4),
            "TTCL": (PelletId.T1,),
            "TTCD": (PelletId.T1,),
        }
        for col, name in enumerate(("LA", "LP", "TBCL", "TBCD", "TTCL", "TTCD")):
            dead = np.zeros(n, dtype=bool)
            for pel in dep[name]:
                dead |= lost[:, pel.value]
            values[dead, col] = np.nan

    utt_id = f"U{utterance_index:02d}"
    track = PelletTrack(speaker.speaker_id, utt_id, cfg.pellet_rate_hz, pos)
    tv = TvTrack(speaker.speaker_id, utt_id, cfg.pellet_rate_hz, "proposed",
                 values)
    audio = AudioClip(_tone_audio(speaker, sines, cfg.duration_s),
                      speaker.speaker_id, utt_id)
    return track, tv, audio


def synth_corpus(cfg: SynthConfig, out_dir) -> dict:
    """Write a full corpus in the toolkit's file formats plus manifest.json.

    Layout: palates/<spk>.palate.csv, traj/<spk>_<utt>.traj.csv,
    tv/<spk>_<utt>.tv.csv, audio/<spk>_<utt>.wav. Palate files hold the
    extended trace. Returns the manifest dict.
    """
    out = Path(out_dir)
    for sub in ("palates", "traj", "tv", "audio"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    speakers = []
    utterances = []
    for i in range(cfg.n_speakers):
        spk = synth_speaker(cfg, i)
        palate_rel = f"palates/{spk.speaker_id}.palate.csv"
        write_palatal_trace(spk.epal, out / palate_rel)
        speakers.append({"id": spk.speaker_id, "sex": spk.sex,
                         "palate": palate_rel})
        for j in range(cfg.utterances_per_speaker):
            track, tv, audio = synth_utterance(cfg, spk, j)
            key = f"{spk.speaker_id}_{tv.utterance_id}"
            rec = {
                "speaker": spk.speaker_id,
                "utterance": tv.utterance_id,
                "pellets": f"traj/{key}.traj.csv",
                "tv": f"tv/{key}.tv.csv",
                "audio": f"audio/{key}.wav",
            }
            write_pellet_track(track, out / rec["pellets"])
            write_tv_track(tv, out / rec["tv"])
            write_wav(audio, out / rec["audio"])
            utterances.append(rec)
    manifest = {
        "version": 1,
        "seed": cfg.seed,
        "pellet_rate_hz": cfg.pellet_rate_hz,
        "speakers": speakers,
        "utterances": utterances,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def read_manifest(path) -> dict:
    path = Path(path)
    manifest = json.loads(path.read_text())
    if manifest.get("version") != 1:
        raise ValueError(f"{path}: unsupported manifest version")
    return manifest
