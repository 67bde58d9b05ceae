"""Model-ready acoustic inputs: MFCC extraction, utterance z-normalization,
2-second segmentation with zero padding, SSL-embedding validation, and
TV/feature rate alignment.

MFCC recipe: 20 ms Hamming window, 10 ms shift, magnitude-squared
spectrum on a zero-padded 512-point transform, 40 triangular mel filters
on 0-8 kHz, natural log with floor, orthonormal DCT-II, first 13
coefficients (0th included). No pre-emphasis, no deltas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft
import scipy.io.wavfile

from .artic_io import FeatureMatrix, TvTrack

__all__ = [
    "AudioClip",
    "MfccConfig",
    "read_wav",
    "write_wav",
    "mel_filterbank",
    "mel_centers",
    "extract_mfcc",
    "znormalize",
    "segment_2s",
    "validate_ssl_matrix",
    "align_tv_to_rate",
]

REQUIRED_SAMPLE_RATE = 16000


@dataclass(frozen=True)
class AudioClip:
    """16 kHz mono audio with amplitudes in [-1, 1]."""

    samples: np.ndarray
    speaker_id: str
    utterance_id: str
    sample_rate: int = REQUIRED_SAMPLE_RATE

    def __post_init__(self):
        if self.sample_rate != REQUIRED_SAMPLE_RATE:
            raise ValueError(f"sample_rate must be {REQUIRED_SAMPLE_RATE} Hz, "
                             f"got {self.sample_rate}")
        samples = np.array(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("samples must be mono (1-D)")
        if not np.isfinite(samples).all():
            raise ValueError("samples must be finite")
        if samples.size and np.abs(samples).max() > 1.0:
            raise ValueError("amplitudes must lie in [-1, 1]")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class MfccConfig:
    n_coeffs: int = 13
    win_ms: float = 20.0
    hop_ms: float = 10.0
    window: str = "hamming"
    n_mels: int = 40
    fft_size: int = 512
    fmin: float = 0.0
    fmax: float = 8000.0
    log_floor: float = 1e-10

    def __post_init__(self):
        if not (self.win_ms > self.hop_ms > 0):
            raise ValueError("need win_ms > hop_ms > 0")
        if self.n_coeffs > self.n_mels:
            raise ValueError("n_coeffs must not exceed n_mels")
        if self.window != "hamming":
            raise ValueError("only the Hamming window is supported")

    @property
    def win_samples(self) -> int:
        return round(self.win_ms * REQUIRED_SAMPLE_RATE / 1000)

    @property
    def hop_samples(self) -> int:
        return round(self.hop_ms * REQUIRED_SAMPLE_RATE / 1000)

    @property
    def frame_rate_hz(self) -> float:
        return 1000.0 / self.hop_ms


def read_wav(path, speaker_id: str | None = None,
             utterance_id: str | None = None) -> AudioClip:
    """Load a 16 kHz mono PCM WAV (16-bit int or 32-bit float)."""
    path = Path(path)
    rate, data = scipy.io.wavfile.read(path)
    if rate != REQUIRED_SAMPLE_RATE:
        raise ValueError(f"{path}: sample rate {rate} Hz, "
                         f"need {REQUIRED_SAMPLE_RATE} Hz mono PCM")
    if data.ndim != 1:
        raise ValueError(f"{path}: expected mono audio, got {data.ndim} channels")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"{path}: unsupported sample format {data.dtype}, "
                         "need 16-bit PCM or 32-bit float")
    stem = path.stem
    return AudioClip(samples, speaker_id or stem, utterance_id or stem)


def write_wav(clip: AudioClip, path) -> None:
    """Write 16-bit PCM; quantization is deterministic and matches the
    reader's /32768 convention."""
    pcm = np.clip(np.round(clip.samples * 32768.0), -32768, 32767)
    scipy.io.wavfile.write(Path(path), clip.sample_rate,
                           pcm.astype("<i2"))


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, float) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, float) / 2595.0) - 1.0)


def _mel_edges(cfg: MfccConfig) -> np.ndarray:
    return _mel_to_hz(np.linspace(_hz_to_mel(cfg.fmin), _hz_to_mel(cfg.fmax),
                                  cfg.n_mels + 2))


def mel_centers(cfg: MfccConfig = MfccConfig()) -> np.ndarray:
    """Peak frequency (Hz) of each triangular mel filter."""
    return _mel_edges(cfg)[1:-1]


def mel_filterbank(cfg: MfccConfig = MfccConfig()) -> np.ndarray:
    """(n_mels, fft_size//2 + 1) triangular filters, unit peak height."""
    edges = _mel_edges(cfg)
    lower, center, upper = edges[:-2], edges[1:-1], edges[2:]
    freqs = np.arange(cfg.fft_size // 2 + 1) * (REQUIRED_SAMPLE_RATE / cfg.fft_size)
    up = (freqs[None, :] - lower[:, None]) / (center - lower)[:, None]
    down = (upper[:, None] - freqs[None, :]) / (upper - center)[:, None]
    return np.maximum(0.0, np.minimum(up, down))


def extract_mfcc(clip: AudioClip, cfg: MfccConfig = MfccConfig()) -> FeatureMatrix:
    """13 MFCCs per 10 ms frame; output rate is exactly 1000/hop_ms Hz."""
    win = cfg.win_samples
    hop = cfg.hop_samples
    n = clip.samples.size
    if n < win:
        raise ValueError(f"clip has {n} samples, shorter than one "
                         f"{win}-sample window")
    n_frames = (n - win) // hop + 1
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = clip.samples[idx] * np.hamming(win)
    spectrum = np.abs(np.fft.rfft(frames, n=cfg.fft_size, axis=1)) ** 2
    energies = spectrum @ mel_filterbank(cfg).T
    log_mel = np.log(np.maximum(energies, cfg.log_floor))
    coeffs = scipy.fft.dct(log_mel, type=2, norm="ortho", axis=1)[:, :cfg.n_coeffs]
    return FeatureMatrix("mfcc13", cfg.frame_rate_hz, coeffs)


def znormalize(m: FeatureMatrix) -> FeatureMatrix:
    """Utterance-wise per-column z-normalization (population std).

    Constant columns come out all-zero instead of dividing by zero.
    """
    if m.rows < 2:
        raise ValueError("z-normalization needs at least 2 rows")
    mean = m.data.mean(axis=0)
    std = m.data.std(axis=0)
    out = np.zeros_like(m.data)
    live = std > 0
    out[:, live] = (m.data[:, live] - mean[live]) / std[live]
    return FeatureMatrix(m.kind, m.rate_hz, out)


def segment_2s(x):
    """Split into consecutive non-overlapping 2 s spans, zero-padding the
    final short span to exactly 2 s. Accepts FeatureMatrix or AudioClip."""
    if isinstance(x, FeatureMatrix):
        seg = round(2 * x.rate_hz)
        if x.rows == 0:
            raise ValueError("cannot segment an empty matrix")
        out = []
        for start in range(0, x.rows, seg):
            chunk = x.data[start:start + seg]
            if chunk.shape[0] < seg:
                pad = np.zeros((seg - chunk.shape[0], x.cols))
                chunk = np.concatenate([chunk, pad])
            out.append(FeatureMatrix(x.kind, x.rate_hz, chunk))
        return out
    if isinstance(x, AudioClip):
        seg = 2 * x.sample_rate
        if x.samples.size == 0:
            raise ValueError("cannot segment an empty clip")
        out = []
        for k, start in enumerate(range(0, x.samples.size, seg)):
            chunk = x.samples[start:start + seg]
            if chunk.size < seg:
                chunk = np.concatenate([chunk, np.zeros(seg - chunk.size)])
            out.append(AudioClip(chunk, x.speaker_id,
                                 f"{x.utterance_id}-seg{k}"))
        return out
    raise TypeError(f"cannot segment {type(x).__name__}")


def validate_ssl_matrix(m: FeatureMatrix) -> FeatureMatrix:
    """Check an ingested SSL embedding matrix against the 50 Hz / 1024-dim
    / whole-2-s-segments contract. Returns the matrix unchanged."""
    if m.kind != "ssl1024":
        raise ValueError(f"kind: expected ssl1024, got {m.kind}")
    if m.cols != 1024:
        raise ValueError(f"cols: expected 1024, got {m.cols}")
    if m.rate_hz != 50:
        raise ValueError(f"rate_hz: expected 50, got {m.rate_hz:g}")
    frames_per_seg = round(2 * m.rate_hz)
    if m.rows == 0 or m.rows % frames_per_seg != 0:
        raise ValueError(
            f"rows: {m.rows} is not a positive multiple of the "
            f"{frames_per_seg}-frame 2-s segment length")
    if not np.isfinite(m.data).all():
        raise ValueError("data: entries must be finite")
    return m


def align_tv_to_rate(track: TvTrack, target_hz: float) -> TvTrack:
    """Linearly resample each TV channel onto a target_hz grid spanning
    the same time support.

    Sentinel frames are dropped from the interpolation support; an output
    frame becomes sentinel when both of its input-grid neighbours are
    sentinel (or when a channel has no finite frames at all).
    """
    if track.n_frames == 0:
        raise ValueError("cannot align an empty track")
    if not target_hz > 0:
        raise ValueError("target_hz must be positive")
    n = track.n_frames
    src_t = np.arange(n) / track.rate_hz
    m = int(np.floor((n - 1) * target_hz / track.rate_hz)) + 1
    dst_t = np.arange(m) / target_hz
    # input-grid neighbours, snapped so exact grid hits count as themselves
    pos = dst_t * track.rate_hz
    left = np.clip(np.floor(pos + 1e-9).astype(int), 0, n - 1)
    right = np.clip(np.ceil(pos - 1e-9).astype(int), 0, n - 1)
    out = np.full((m, 6), np.nan)
    for ch in range(6):
        v = track.values[:, ch]
        ok = np.isfinite(v)
        if not ok.any():
            continue
        interp = np.interp(dst_t, src_t[ok], v[ok])
        dead = ~ok[left] & ~ok[right]
        interp[dead] = np.nan
        out[:, ch] = interp
    return TvTrack(track.speaker_id, track.utterance_id, float(target_hz),
                   track.variant, out, t0=track.t0)
