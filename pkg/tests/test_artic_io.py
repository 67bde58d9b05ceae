import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvkit.artic_io import (FormatError, FeatureMatrix, PalatalTrace,
                            PelletId, PelletTrack, TvTrack,
                            read_feature_matrix, read_palatal_trace,
                            read_pellet_track, read_tv_track,
                            write_feature_matrix, write_palatal_trace,
                            write_pellet_track, write_tv_track)

RNG = np.random.default_rng(20240817)


def make_track(n=3, rate=100.0, speaker="S00", utt="U00"):
    pos = RNG.uniform(-60.0, 10.0, size=(n, 8, 2))
    return PelletTrack(speaker, utt, rate, pos)


class TestTrajectoryFormat:
    def test_three_finite_rows_parse_all_valid(self, tmp_path):
        track = make_track(3)
        path = tmp_path / "t.traj.csv"
        write_pellet_track(track, path)
        got = read_pellet_track(path)
        assert got.n_frames == 3
        assert got.valid.all()
        assert got.speaker_id == "S00" and got.utterance_id == "U00"
        np.testing.assert_array_equal(got.positions, track.positions)

    def test_nan_cells_flag_pellet_invalid(self, tmp_path):
        pos = RNG.uniform(-50, 10, size=(3, 8, 2))
        pos[1, PelletId.T3.value] = np.nan
        track = PelletTrack("S00", "U00", 145.0, pos)
        path = tmp_path / "t.traj.csv"
        write_pellet_track(track, path)
        assert "NaN,NaN" in path.read_text()
        got = read_pellet_track(path)
        assert not got.valid[1, PelletId.T3.value]
        assert got.valid.sum() == 23
        assert got.frames[1].valid[PelletId.T3] is False

    def test_decreasing_time_errors_with_row(self, tmp_path):
        track = make_track(8, rate=100.0)
        path = tmp_path / "t.traj.csv"
        write_pellet_track(track, path)
        lines = path.read_text().splitlines()
        cells = lines[6].split(",")  # data row index 4 -> file line 7
        cells[0] = "0.01"
        lines[6] = ",".join(cells)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError) as err:
            read_pellet_track(path)
        assert err.value.line == 7

    def test_wrong_column_count_errors_with_line(self, tmp_path):
        path = tmp_path / "t.traj.csv"
        write_pellet_track(make_track(3), path)
        lines = path.read_text().splitlines()
        lines[3] += ",1.0"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError) as err:
            read_pellet_track(path)
        assert err.value.line == 4 and "column" in str(err.value)

    def test_unparseable_number_errors_with_line(self, tmp_path):
        path = tmp_path / "t.traj.csv"
        write_pellet_track(make_track(3), path)
        lines = path.read_text().splitlines()
        lines[4] = lines[4].replace(lines[4].split(",")[3], "bogus", 1)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError) as err:
            read_pellet_track(path)
        assert err.value.line == 5

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "t.traj.csv"
        path.write_text("#wrong v1,rate_hz=100,speaker=a,utterance=b\n")
        with pytest.raises(FormatError):
            read_pellet_track(path)

    def test_partial_nan_invalidates_whole_pellet(self):
        pos = np.zeros((1, 8, 2))
        pos[0, 2, 0] = np.nan  # x lost, y present
        track = PelletTrack("S", "U", 100.0, pos)
        assert np.isnan(track.positions[0, 2]).all()
        assert not track.valid[0, 2]

    def test_frames_view_roundtrips(self):
        track = make_track(4, rate=145.0)
        again = PelletTrack.from_frames("S00", "U00", 145.0, track.frames)
        np.testing.assert_allclose(again.positions, track.positions)


class TestTvFormat:
    def make_tv(self, n=100, variant="proposed"):
        vals = np.column_stack([
            RNG.uniform(0, 20, n), RNG.uniform(-60, 0, n),
            RNG.uniform(-10, 40, n), RNG.uniform(0, 15, n),
            RNG.uniform(-10, 40, n), RNG.uniform(0, 15, n)])
        return TvTrack("S01", "U02", 145.0, variant, vals)

    def test_roundtrip_100_frames(self, tmp_path):
        tv = self.make_tv(100)
        path = tmp_path / "x.tv.csv"
        write_tv_track(tv, path)
        got = read_tv_track(path)
        np.testing.assert_allclose(got.values, tv.values, atol=1e-6)
        assert got.variant == tv.variant
        assert got.rate_hz == tv.rate_hz

    def test_nan_cells_roundtrip_as_nan(self, tmp_path):
        tv = self.make_tv(5)
        vals = tv.values.copy()
        vals[2, 0] = np.nan
        tv = TvTrack("S01", "U02", 145.0, "proposed", vals)
        path = tmp_path / "x.tv.csv"
        write_tv_track(tv, path)
        got = read_tv_track(path)
        assert math.isnan(got.values[2, 0])
        assert np.isfinite(got.values[2, 1:]).all()

    def test_empty_track_roundtrips(self, tmp_path):
        tv = TvTrack("S01", "U02", 145.0, "proposed", np.zeros((0, 6)))
        path = tmp_path / "x.tv.csv"
        write_tv_track(tv, path)
        assert len(path.read_text().splitlines()) == 2
        got = read_tv_track(path)
        assert got.n_frames == 0

    def test_negative_aperture_rejected(self, tmp_path):
        path = tmp_path / "x.tv.csv"
        write_tv_track(self.make_tv(3), path)
        lines = path.read_text().splitlines()
        cells = lines[2].split(",")
        cells[1] = "-1.0"
        lines[2] = ",".join(cells)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError, match="LA"):
            read_tv_track(path)

    def test_variant_recorded(self, tmp_path):
        path = tmp_path / "x.tv.csv"
        write_tv_track(self.make_tv(3, variant="baseline"), path)
        assert "variant=baseline" in path.read_text().splitlines()[0]
        assert read_tv_track(path).variant == "baseline"


class TestPalateFormat:
    def test_two_point_file(self, tmp_path):
        path = tmp_path / "p.palate.csv"
        write_palatal_trace(PalatalTrace("S00", [(0.0, 1.0), (-1.0, 2.0)]), path)
        got = read_palatal_trace(path)
        assert got.n_points == 2 and not got.extended

    def test_duplicate_consecutive_point_rejected(self, tmp_path):
        path = tmp_path / "p.palate.csv"
        path.write_text("#palate v1,speaker=S00,extended=0\n"
                        "0.0,1.0\n0.0,1.0\n-2.0,3.0\n")
        with pytest.raises(FormatError, match="duplicate"):
            read_palatal_trace(path)

    def test_forty_points_order_preserved(self, tmp_path):
        xs = np.linspace(0, -39, 40)
        pts = np.stack([xs, 10 + np.sin(xs / 7.0)], axis=1)
        path = tmp_path / "p.palate.csv"
        write_palatal_trace(PalatalTrace("S00", pts, extended=True), path)
        got = read_palatal_trace(path)
        assert got.n_points == 40 and got.extended
        np.testing.assert_array_equal(got.points, pts)

    def test_single_point_rejected(self, tmp_path):
        path = tmp_path / "p.palate.csv"
        path.write_text("#palate v1,speaker=S00,extended=0\n0.0,1.0\n")
        with pytest.raises(FormatError, match="at least 2"):
            read_palatal_trace(path)


class TestFeatureBinary:
    def roundtrip(self, kind, rows, rate, tmp_path):
        data = RNG.standard_normal((rows, {"mfcc13": 13, "ssl1024": 1024}[kind]))
        data = data.astype(np.float32).astype(np.float64)
        m = FeatureMatrix(kind, rate, data)
        path = tmp_path / "m.ftm"
        write_feature_matrix(m, path)
        got = read_feature_matrix(path)
        assert got.kind == kind and got.rate_hz == rate
        np.testing.assert_array_equal(got.data, m.data)
        # a rewrite of the decoded matrix is byte-identical
        second = tmp_path / "m2.ftm"
        write_feature_matrix(got, second)
        assert second.read_bytes() == path.read_bytes()

    def test_ssl_roundtrip_bit_exact(self, tmp_path):
        self.roundtrip("ssl1024", 100, 50.0, tmp_path)

    def test_mfcc_roundtrip_bit_exact(self, tmp_path):
        self.roundtrip("mfcc13", 199, 100.0, tmp_path)

    def test_kind_cols_mismatch_rejected(self, tmp_path):
        m = FeatureMatrix("mfcc13", 100.0, np.zeros((4, 13)))
        path = tmp_path / "m.ftm"
        write_feature_matrix(m, path)
        blob = bytearray(path.read_bytes())
        blob[13:17] = (1024).to_bytes(4, "little")  # cols field
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError, match="columns"):
            read_feature_matrix(path)

    def test_truncated_payload_rejected(self, tmp_path):
        m = FeatureMatrix("mfcc13", 100.0, np.ones((4, 13)))
        path = tmp_path / "m.ftm"
        write_feature_matrix(m, path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(FormatError, match="payload"):
            read_feature_matrix(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "m.ftm"
        path.write_bytes(b"NOPE" + b"\x00" * 13)
        with pytest.raises(FormatError, match="magic"):
            read_feature_matrix(path)

    def test_nonfinite_payload_rejected(self, tmp_path):
        m = FeatureMatrix("mfcc13", 100.0, np.ones((2, 13)))
        path = tmp_path / "m.ftm"
        write_feature_matrix(m, path)
        blob = bytearray(path.read_bytes())
        blob[17:21] = np.float32(np.nan).tobytes()
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError, match="finite"):
            read_feature_matrix(path)


@st.composite
def tv_values(draw):
    n = draw(st.integers(0, 40))
    vals = draw(st.lists(
        st.lists(st.floats(-80, 80, allow_nan=False), min_size=6, max_size=6),
        min_size=n, max_size=n))
    arr = np.asarray(vals, float).reshape(n, 6)
    arr[:, [0, 3, 5]] = np.abs(arr[:, [0, 3, 5]])
    return arr


class TestRoundtripProperties:
    @settings(max_examples=40, deadline=None)
    @given(vals=tv_values())
    def test_tv_roundtrip_is_identity(self, vals, tmp_path_factory):
        tv = TvTrack("S0", "U0", 97.5, "proposed", vals)
        path = tmp_path_factory.mktemp("io") / "x.tv.csv"
        write_tv_track(tv, path)
        got = read_tv_track(path)
        np.testing.assert_array_equal(got.values, tv.values)

    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(1, 30), seed=st.integers(0, 2 ** 32 - 1))
    def test_trajectory_roundtrip_is_identity(self, n, seed, tmp_path_factory):
        rng = np.random.default_rng(seed)
        pos = rng.uniform(-80, 20, size=(n, 8, 2))
        pos[rng.random((n, 8)) < 0.2] = np.nan
        track = PelletTrack("S0", "U0", 145.0, pos)
        path = tmp_path_factory.mktemp("io") / "x.traj.csv"
        write_pellet_track(track, path)
        got = read_pellet_track(path)
        np.testing.assert_array_equal(got.positions, track.positions)
        np.testing.assert_array_equal(got.valid, track.valid)
