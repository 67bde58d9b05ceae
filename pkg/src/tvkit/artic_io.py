"""Articulatory data model and every on-disk format the toolkit speaks.

Mistracked pellet samples are carried as NaN positions with valid=False,
never dropped: downstream code decides policy. All container types are
immutable after construction (arrays are frozen read-only) and safe to
share across threads.

Formats (all little-endian, '\\n' newlines, '.' decimal point):

* trajectory CSV  -- ``#pellets v1,rate_hz=...,speaker=...,utterance=...``
* palate CSV      -- ``#palate v1,speaker=...,extended=<0|1>``
* TV CSV          -- ``#tv v1,rate_hz=...,speaker=...,utterance=...,variant=...``
* feature binary  -- magic ``FTM1``, u8 kind, f32 rate, u32 rows, u32 cols,
                     rows*cols f32 row-major payload
"""
from __future__ import annotations

import math
import re
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

__all__ = [
    "FormatError",
    "PelletId",
    "PELLET_ORDER",
    "TV_NAMES",
    "PelletFrame",
    "PelletTrack",
    "PalatalTrace",
    "TvFrame",
    "TvTrack",
    "FeatureMatrix",
    "read_pellet_track",
    "write_pellet_track",
    "read_palatal_trace",
    "write_palatal_trace",
    "read_tv_track",
    "write_tv_track",
    "read_feature_matrix",
    "write_feature_matrix",
]

#: timing slack when checking t[i] == t[0] + i/rate_hz, in seconds
TIME_TOL_S = 1e-6

TV_NAMES = ("LA", "LP", "TBCL", "TBCD", "TTCL", "TTCD")
TV_VARIANTS = ("baseline", "proposed")

FEATURE_KINDS = {"mfcc13": 13, "ssl1024": 1024}
_KIND_CODE = {"mfcc13": 0, "ssl1024": 1}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}
_FTM_MAGIC = b"FTM1"

_ID_RE = re.compile(r"^[A-Za-z0-9_\-]+$")


class FormatError(ValueError):
    """An on-disk file violates its format contract."""

    def __init__(self, message: str, path=None, line: int | None = None):
        loc = str(path) if path is not None else ""
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class PelletId(Enum):
    """The eight XRMB pellets, in the stable order used by every file layout."""

    UL = 0
    LL = 1
    T1 = 2
    T2 = 3
    T3 = 4
    T4 = 5
    MANi = 6
    MANm = 7


PELLET_ORDER: tuple[PelletId, ...] = tuple(PelletId)


def _check_id(name: str, value: str) -> str:
    if not _ID_RE.match(value):
        raise ValueError(f"{name} must match [A-Za-z0-9_-]+, got {value!r}")
    return value


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _fmt(x: float) -> str:
    """Shortest exact decimal for a float; literal NaN for sentinels."""
    return repr(float(x)) if math.isfinite(x) else "NaN"


@dataclass(frozen=True)
class PelletFrame:
    """One time sample: eight 2-D pellet positions plus validity flags.

    Coordinates are millimetres in the occlusal frame (origin at the
    maxillary incisor tip, X axis along the maxillary occlusal plane).
    """

    t: float
    pos: dict[PelletId, tuple[float, float]]
    valid: dict[PelletId, bool]


def _derive_times(n: int, rate_hz: float, t0: float) -> np.ndarray:
    return t0 + np.arange(n, dtype=np.float64) / rate_hz


def _check_times(times: np.ndarray, rate_hz: float, what: str):
    n = len(times)
    if n == 0:
        return
    expected = _derive_times(n, rate_hz, float(times[0]))
    bad = np.nonzero(np.abs(times - expected) > TIME_TOL_S)[0]
    if bad.size:
        i = int(bad[0])
        raise ValueError(
            f"{what}: timestamp {times[i]:.9g} at frame {i} deviates from "
            f"uniform grid t0 + i/{rate_hz:g} by more than {TIME_TOL_S} s")


@dataclass(frozen=True)
class PelletTrack:
    """Rate-stamped pellet trajectory for one utterance.

    ``positions`` has shape (n_frames, 8, 2) in PELLET_ORDER; a mistracked
    pellet is a NaN pair. Timestamps are t0 + i/rate_hz.
    """

    speaker_id: str
    utterance_id: str
    rate_hz: float
    positions: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        _check_id("speaker_id", self.speaker_id)
        _check_id("utterance_id", self.utterance_id)
        if not (self.rate_hz > 0 and math.isfinite(self.rate_hz)):
            raise ValueError(f"rate_hz must be positive, got {self.rate_hz}")
        if self.t0 < 0:
            raise ValueError("t0 must be non-negative")
        pos = np.array(self.positions, dtype=np.float64)
        if pos.ndim != 3 or pos.shape[1:] != (8, 2):
            raise ValueError(f"positions must be (n, 8, 2), got {pos.shape}")
        # a pellet with any non-finite coordinate is mistracked: NaN both
        bad = ~np.isfinite(pos).all(axis=2)
        pos[bad] = np.nan
        object.__setattr__(self, "positions", _freeze(pos))

    @property
    def n_frames(self) -> int:
        return self.positions.shape[0]

    def __len__(self) -> int:
        return self.n_frames

    @property
    def times(self) -> np.ndarray:
        return _derive_times(self.n_frames, self.rate_hz, self.t0)

    @property
    def valid(self) -> np.ndarray:
        """(n, 8) booleans: True where the pellet is tracked."""
        return np.isfinite(self.positions).all(axis=2)

    @property
    def frames(self) -> list[PelletFrame]:
        times, valid = self.times, self.valid
        return [
            PelletFrame(
                t=float(times[i]),
                pos={p: (float(self.positions[i, j, 0]),
                         float(self.positions[i, j, 1]))
                     for j, p in enumerate(PELLET_ORDER)},
                valid={p: bool(valid[i, j])
                       for j, p in enumerate(PELLET_ORDER)},
            )
            for i in range(self.n_frames)
        ]

    @classmethod
    def from_frames(cls, speaker_id, utterance_id, rate_hz,
                    frames: list[PelletFrame]) -> "PelletTrack":
        times = np.array([f.t for f in frames], dtype=np.float64)
        _check_times(times, rate_hz, "PelletTrack")
        pos = np.full((len(frames), 8, 2), np.nan)
        for i, f in enumerate(frames):
            for j, p in enumerate(PELLET_ORDER):
                if f.valid.get(p, False):
                    pos[i, j] = f.pos[p]
        t0 = float(times[0]) if len(frames) else 0.0
        return cls(speaker_id, utterance_id, rate_hz, pos, t0)


@dataclass(frozen=True)
class PalatalTrace:
    """Ordered anterior-to-posterior 2-D polyline modeling the palate.

    ``extended=True`` means the posterior end already includes the
    soft-palate continuation down the anterior pharyngeal wall.
    """

    speaker_id: str
    points: np.ndarray
    extended: bool = False

    def __post_init__(self):
        _check_id("speaker_id", self.speaker_id)
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must be (m, 2), got {pts.shape}")
        if pts.shape[0] < 2:
            raise ValueError("palatal trace needs at least 2 points")
        if not np.isfinite(pts).all():
            raise ValueError("palatal trace points must be finite")
        same = np.all(pts[1:] == pts[:-1], axis=1)
        if same.any():
            i = int(np.nonzero(same)[0][0])
            raise ValueError(f"consecutive duplicate palate point at index {i + 1}")
        object.__setattr__(self, "points", _freeze(pts))

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class TvFrame:
    """The six tract variables at one time sample, NaN where unavailable."""

    la: float
    lp: float
    tbcl: float
    tbcd: float
    ttcl: float
    ttcd: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.la, self.lp, self.tbcl, self.tbcd, self.ttcl, self.ttcd)


@dataclass(frozen=True)
class TvTrack:
    """Rate-stamped tract-variable sequence; ``values`` is (n, 6) in
    LA, LP, TBCL, TBCD, TTCL, TTCD order."""

    speaker_id: str
    utterance_id: str
    rate_hz: float
    variant: str
    values: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        _check_id("speaker_id", self.speaker_id)
        _check_id("utterance_id", self.utterance_id)
        if not (self.rate_hz > 0 and math.isfinite(self.rate_hz)):
            raise ValueError(f"rate_hz must be positive, got {self.rate_hz}")
        if self.variant not in TV_VARIANTS:
            raise ValueError(f"variant must be one of {TV_VARIANTS}, "
                             f"got {self.variant!r}")
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != 6:
            raise ValueError(f"values must be (n, 6), got {vals.shape}")
        for col, name in ((0, "LA"), (3, "TBCD"), (5, "TTCD")):
            v = vals[:, col]
            if (v[np.isfinite(v)] < 0).any():
                raise ValueError(f"finite {name} values must be >= 0")
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.n_frames

    @property
    def times(self) -> np.ndarray:
        return _derive_times(self.n_frames, self.rate_hz, self.t0)

    @property
    def frames(self) -> list[TvFrame]:
        return [TvFrame(*map(float, row)) for row in self.values]

    def channel(self, name: str) -> np.ndarray:
        return self.values[:, TV_NAMES.index(name)]


@dataclass(frozen=True)
class FeatureMatrix:
    """frames x dims feature matrix with a frame rate and a kind tag.

    kind fixes the column count: mfcc13 -> 13, ssl1024 -> 1024. Data is
    float64 in memory; the binary format stores float32.
    """

    kind: str
    rate_hz: float
    data: np.ndarray

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"kind must be one of {sorted(FEATURE_KINDS)}, "
                             f"got {self.kind!r}")
        if not (self.rate_hz > 0 and math.isfinite(self.rate_hz)):
            raise ValueError(f"rate_hz must be positive, got {self.rate_hz}")
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"data must be 2-D, got shape {data.shape}")
        want = FEATURE_KINDS[self.kind]
        if data.shape[1] != want:
            raise ValueError(
                f"kind {self.kind} requires {want} columns, got {data.shape[1]}")
        if not np.isfinite(data).all():
            raise ValueError("feature matrix entries must be finite")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


# ---------------------------------------------------------------------------
# CSV plumbing

def _parse_header(line: str, magic: str, path, fields: tuple[str, ...]) -> dict:
    parts = line.rstrip("\n").split(",")
    if parts[0] != magic:
        raise FormatError(f"expected header magic {magic!r}, got {parts[0]!r}",
                          path, 1)
    kv = {}
    for part in parts[1:]:
        if "=" not in part:
            raise FormatError(f"malformed header field {part!r}", path, 1)
        k, v = part.split("=", 1)
        kv[k] = v
    missing = [f for f in fields if f not in kv]
    if missing:
        raise FormatError(f"header missing fields {missing}", path, 1)
    return kv


def _parse_rows(lines: list[str], ncols: int, path, first_line: int) -> np.ndarray:
    """Parse CSV data lines into an (n, ncols) float array, NaN-friendly.

    Errors carry the 1-based file line number of the offending row.
    """
    out = np.empty((len(lines), ncols), dtype=np.float64)
    for i, line in enumerate(lines):
        cells = line.rstrip("\n").split(",")
        if len(cells) != ncols:
            raise FormatError(
                f"expected {ncols} columns, got {len(cells)}",
                path, first_line + i)
        try:
            out[i] = [float(c) if c != "" else np.nan for c in cells]
        except ValueError as exc:
            raise FormatError(f"unparseable number: {exc}",
                              path, first_line + i) from None
    return out


def _parse_rate(kv: dict, path) -> float:
    try:
        rate = float(kv["rate_hz"])
    except ValueError:
        raise FormatError(f"bad rate_hz {kv['rate_hz']!r}", path, 1) from None
    if not (rate > 0 and math.isfinite(rate)):
        raise FormatError(f"rate_hz must be positive, got {rate}", path, 1)
    return rate


_TRAJ_COLUMNS = "t," + ",".join(
    f"{p.name}_{ax}" for p in PELLET_ORDER for ax in ("x", "y"))
_TV_COLUMNS = "t," + ",".join(TV_NAMES)


def write_pellet_track(track: PelletTrack, path) -> None:
    path = Path(path)
    lines = [
        f"#pellets v1,rate_hz={_fmt(track.rate_hz)},speaker={track.speaker_id},"
        f"utterance={track.utterance_id}",
        _TRAJ_COLUMNS,
    ]
    flat = track.positions.reshape(track.n_frames, 16)
    for t, row in zip(track.times, flat):
        lines.append(",".join([_fmt(t)] + [_fmt(v) for v in row]))
    path.write_text("\n".join(lines) + "\n")


def read_pellet_track(path) -> PelletTrack:
    path = Path(path)
    lines = path.read_text().splitlines()
    if len(lines) < 2:
        raise FormatError("missing header lines", path, 1)
    kv = _parse_header(lines[0], "#pellets v1", path,
                       ("rate_hz", "speaker", "utterance"))
    if lines[1] != _TRAJ_COLUMNS:
        raise FormatError(f"bad column header, expected {_TRAJ_COLUMNS!r}",
                          path, 2)
    rate = _parse_rate(kv, path)
    data = _parse_rows(lines[2:], 17, path, 3)
    times = data[:, 0]
    if not np.isfinite(times).all():
        i = int(np.nonzero(~np.isfinite(times))[0][0])
        raise FormatError("non-finite timestamp", path, 3 + i)
    try:
        _check_times(times, rate, "trajectory")
    except ValueError as exc:
        # recover the offending frame index for the line number
        expected = _derive_times(len(times), rate, times[0] if len(times) else 0.0)
        bad = np.nonzero(np.abs(times - expected) > TIME_TOL_S)[0]
        line = 3 + int(bad[0]) if bad.size else None
        raise FormatError(str(exc), path, line) from None
    pos = data[:, 1:].reshape(-1, 8, 2)
    return PelletTrack(kv["speaker"], kv["utterance"], rate, pos,
                       t0=float(times[0]) if len(times) else 0.0)


def write_palatal_trace(trace: PalatalTrace, path) -> None:
    path = Path(path)
    lines = [f"#palate v1,speaker={trace.speaker_id},"
             f"extended={1 if trace.extended else 0}"]
    for x, y in trace.points:
        lines.append(f"{_fmt(x)},{_fmt(y)}")
    path.write_text("\n".join(lines) + "\n")


def read_palatal_trace(path) -> PalatalTrace:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise FormatError("empty file", path, 1)
    kv = _parse_header(lines[0], "#palate v1", path, ("speaker", "extended"))
    if kv["extended"] not in ("0", "1"):
        raise FormatError(f"extended must be 0 or 1, got {kv['extended']!r}",
                          path, 1)
    pts = _parse_rows(lines[1:], 2, path, 2)
    if pts.shape[0] < 2:
        raise FormatError("palatal trace needs at least 2 points", path)
    if not np.isfinite(pts).all():
        i = int(np.nonzero(~np.isfinite(pts).all(axis=1))[0][0])
        raise FormatError("palate point must be finite", path, 2 + i)
    same = np.all(pts[1:] == pts[:-1], axis=1)
    if same.any():
        i = int(np.nonzero(same)[0][0])
        raise FormatError("consecutive duplicate palate point", path, 3 + i)
    return PalatalTrace(kv["speaker"], pts, extended=kv["extended"] == "1")


def write_tv_track(track: TvTrack, path) -> None:
    path = Path(path)
    lines = [
        f"#tv v1,rate_hz={_fmt(track.rate_hz)},speaker={track.speaker_id},"
        f"utterance={track.utterance_id},variant={track.variant}",
        _TV_COLUMNS,
    ]
    for t, row in zip(track.times, track.values):
        lines.append(",".join([_fmt(t)] + [_fmt(v) for v in row]))
    path.write_text("\n".join(lines) + "\n")


def read_tv_track(path) -> TvTrack:
    path = Path(path)
    lines = path.read_text().splitlines()
    if len(lines) < 2:
        raise FormatError("missing header lines", path, 1)
    kv = _parse_header(lines[0], "#tv v1", path,
                       ("rate_hz", "speaker", "utterance", "variant"))
    if kv["variant"] not in TV_VARIANTS:
        raise FormatError(f"variant must be one of {TV_VARIANTS}", path, 1)
    if lines[1] != _TV_COLUMNS:
        raise FormatError(f"bad column header, expected {_TV_COLUMNS!r}", path, 2)
    rate = _parse_rate(kv, path)
    data = _parse_rows(lines[2:], 7, path, 3)
    times = data[:, 0]
    try:
        _check_times(times, rate, "tv track")
    except ValueError as exc:
        raise FormatError(str(exc), path) from None
    try:
        return TvTrack(kv["speaker"], kv["utterance"], rate, kv["variant"],
                       data[:, 1:], t0=float(times[0]) if len(times) else 0.0)
    except ValueError as exc:
        raise FormatError(str(exc), path) from None


def write_feature_matrix(m: FeatureMatrix, path) -> None:
    path = Path(path)
    header = _FTM_MAGIC + struct.pack(
        "<BfII", _KIND_CODE[m.kind], m.rate_hz, m.rows, m.cols)
    payload = np.ascontiguousarray(m.data, dtype="<f4").tobytes()
    path.write_bytes(header + payload)


def read_feature_matrix(path) -> FeatureMatrix:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != _FTM_MAGIC:
        raise FormatError(f"bad magic {blob[:4]!r}, expected {_FTM_MAGIC!r}", path)
    header_len = 4 + struct.calcsize("<BfII")
    if len(blob) < header_len:
        raise FormatError("truncated header", path)
    code, rate, rows, cols = struct.unpack("<BfII", blob[4:header_len])
    if code not in _CODE_KIND:
        raise FormatError(f"unknown kind code {code}", path)
    kind = _CODE_KIND[code]
    if cols != FEATURE_KINDS[kind]:
        raise FormatError(
            f"kind {kind} requires {FEATURE_KINDS[kind]} columns, "
            f"file declares {cols}", path)
    want = rows * cols * 4
    payload = blob[header_len:]
    if len(payload) != want:
        raise FormatError(
            f"payload has {len(payload)} bytes, expected {want}", path)
    data = np.frombuffer(payload, dtype="<f4").reshape(rows, cols)
    if not np.isfinite(data).all():
        raise FormatError("feature matrix entries must be finite", path)
    try:
        return FeatureMatrix(kind, float(rate), data.astype(np.float64))
    except ValueError as exc:
        raise FormatError(str(exc), path) from None
