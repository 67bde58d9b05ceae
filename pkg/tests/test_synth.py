import json

import numpy as np
import pytest

from tvkit.artic_io import (PelletId, read_palatal_trace, read_pellet_track,
                            read_tv_track)
from tvkit.features import read_wav
from tvkit.synth import (SynthConfig, read_manifest, synth_corpus,
                         synth_speaker, synth_utterance)
from tvkit.tract_variables import TvConfig, compute_tv_track

BASE = SynthConfig(seed=42, n_speakers=4, utterances_per_speaker=3,
                   duration_s=3.0)


def fixed_motion(**overrides):
    """Motion parameter table with pinned (offset, amplitude) draws."""
    params = {
        "la": (10.0, 10.0, 3.0, 3.0),
        "lp_rel": (0.5, 0.5, 1.5, 1.5),
        "ttcd": (4.0, 4.0, 1.5, 1.5),
        "tbcd": (3.5, 3.5, 1.0, 1.0),
        "radius": (18.0, 18.0, 1.5, 1.5),
    }
    params.update(overrides)
    return params


class TestSpeaker:
    def test_deterministic_per_seed_and_index(self):
        a = synth_speaker(BASE, 2)
        b = synth_speaker(BASE, 2)
        np.testing.assert_array_equal(a.palate.points, b.palate.points)
        assert a.ul_rest == b.ul_rest and a.pellet_angles == b.pellet_angles

    def test_different_indices_differ(self):
        a = synth_speaker(BASE, 0)
        b = synth_speaker(BASE, 1)
        assert a.ul_rest != b.ul_rest
        assert not np.array_equal(a.palate.points, b.palate.points)

    def test_palate_is_simple_and_ordered(self):
        for i in range(BASE.n_speakers):
            spk = synth_speaker(BASE, i)
            xs = spk.palate.points[:, 0]
            assert (np.diff(xs) < 0).all()  # strictly anterior to posterior
            assert not spk.palate.extended and spk.epal.extended
            # concave-down arc: interior points above the chord ends
            ys = spk.palate.points[:, 1]
            assert ys[1:-1].min() >= min(ys[0], ys[-1]) - 1e-12

    def test_sex_round_robin(self):
        sexes = [synth_speaker(BASE, i).sex for i in range(4)]
        assert sexes == ["M", "F", "M", "F"]


class TestUtterance:
    def test_zero_motion_gives_constant_tvs(self):
        cfg = SynthConfig(seed=1, n_speakers=1, utterances_per_speaker=1,
                          duration_s=1.0,
                          motion_params=fixed_motion(
                              la=(10.0, 10.0, 0.0, 0.0),
                              lp_rel=(0.5, 0.5, 0.0, 0.0),
                              ttcd=(4.0, 4.0, 0.0, 0.0),
                              tbcd=(3.5, 3.5, 0.0, 0.0),
                              radius=(18.0, 18.0, 0.0, 0.0)))
        spk = synth_speaker(cfg, 0)
        track, tv, _ = synth_utterance(cfg, spk, 0)
        assert np.ptp(tv.values, axis=0).max() < 1e-9
        got = compute_tv_track(track, spk.epal, TvConfig(resolution_mm=1e-3))
        np.testing.assert_allclose(got.values, tv.values, atol=1e-3)

    def test_la_sinusoid_recovered_through_pipeline(self):
        cfg = SynthConfig(seed=2, n_speakers=1, utterances_per_speaker=1,
                          duration_s=2.0, motion_freq_range=(2.0, 2.0),
                          motion_params=fixed_motion())
        spk = synth_speaker(cfg, 0)
        track, tv, _ = synth_utterance(cfg, spk, 0)
        t = track.times
        la = tv.values[:, 0]
        # offset 10, amplitude 3, frequency 2 Hz, free phase
        assert la.mean() == pytest.approx(10.0, abs=0.2)
        assert (la.max() - la.min()) / 2 == pytest.approx(3.0, abs=0.05)
        got = compute_tv_track(track, spk.epal, TvConfig(resolution_mm=1e-3))
        np.testing.assert_allclose(got.values[:, 0], la, atol=1e-3)

    def test_all_tvs_match_pipeline(self):
        spk = synth_speaker(BASE, 1)
        track, tv, _ = synth_utterance(BASE, spk, 2)
        got = compute_tv_track(track, spk.epal, TvConfig(resolution_mm=1e-3))
        err = np.abs(got.values - tv.values)
        assert np.nanmax(err) < 1e-3

    def test_tone_frequency_tracks_constriction(self):
        cfg = SynthConfig(seed=3, n_speakers=1, utterances_per_speaker=1,
                          duration_s=4.0, motion_freq_range=(0.4, 0.6),
                          motion_params=fixed_motion())
        spk = synth_speaker(cfg, 0)
        _, tv, audio = synth_utterance(cfg, spk, 0)
        from tvkit.synth import TONE_BANDS
        lo, hi = TONE_BANDS["TTCD"]
        fs = 16000
        win = 2048
        hop = 1024
        centers, peaks = [], []
        hann = np.hanning(win)
        freqs = np.fft.rfftfreq(win, 1.0 / fs)
        band = (freqs >= lo - 40) & (freqs <= hi + 40)
        for start in range(0, audio.samples.size - win, hop):
            seg = audio.samples[start:start + win] * hann
            mag = np.abs(np.fft.rfft(seg))
            peaks.append(freqs[band][np.argmax(mag[band])])
            centers.append((start + win / 2) / fs)
        ttcd = np.interp(centers, tv.times, tv.values[:, 5])
        r = np.corrcoef(peaks, ttcd)[0, 1]
        assert r > 0.95
        # rising constriction distance means rising tone frequency
        rising = np.diff(ttcd) > 0.01
        assert (np.diff(peaks)[rising] > -20).all()

    def test_audio_is_in_range_and_deterministic(self):
        spk = synth_speaker(BASE, 0)
        _, _, a1 = synth_utterance(BASE, spk, 0)
        _, _, a2 = synth_utterance(BASE, spk, 0)
        np.testing.assert_array_equal(a1.samples, a2.samples)
        assert np.abs(a1.samples).max() <= 1.0
        assert a1.samples.size == round(BASE.duration_s * 16000)

    def test_mistrack_injection_propagates(self):
        cfg = SynthConfig(seed=4, n_speakers=1, utterances_per_speaker=1,
                          duration_s=2.0, mistrack_prob=0.1)
        spk = synth_speaker(cfg, 0)
        track, tv, _ = synth_utterance(cfg, spk, 0)
        assert not track.valid.all()
        lost_t1 = ~track.valid[:, PelletId.T1.value]
        assert np.isnan(tv.values[lost_t1, 5]).all()  # TTCD dies with T1
        got = compute_tv_track(track, spk.epal, TvConfig(resolution_mm=1e-3))
        np.testing.assert_array_equal(np.isnan(got.values), np.isnan(tv.values))
        both = np.isfinite(got.values) & np.isfinite(tv.values)
        assert np.abs(got.values[both] - tv.values[both]).max() < 1e-3


class TestCorpus:
    def test_counts_and_referential_integrity(self, tmp_path):
        manifest = synth_corpus(BASE, tmp_path)
        assert len(manifest["speakers"]) == 4
        assert len(manifest["utterances"]) == 12
        assert sorted(p.name for p in (tmp_path / "palates").iterdir()) == \
            sorted(s["palate"].split("/")[1] for s in manifest["speakers"])
        again = read_manifest(tmp_path / "manifest.json")
        assert again == manifest
        for spk in manifest["speakers"]:
            trace = read_palatal_trace(tmp_path / spk["palate"])
            assert trace.extended and trace.speaker_id == spk["id"]
        for utt in manifest["utterances"]:
            track = read_pellet_track(tmp_path / utt["pellets"])
            tv = read_tv_track(tmp_path / utt["tv"])
            clip = read_wav(tmp_path / utt["audio"])
            assert track.speaker_id == tv.speaker_id == utt["speaker"]
            assert track.n_frames == tv.n_frames
            assert clip.duration_s == pytest.approx(BASE.duration_s)

    def test_regeneration_is_byte_identical(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        synth_corpus(BASE, a)
        synth_corpus(BASE, b)
        files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
        assert files_a == files_b
        for rel in files_a:
            assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel

    def test_sex_labels_in_manifest(self, tmp_path):
        manifest = synth_corpus(BASE, tmp_path)
        assert [s["sex"] for s in manifest["speakers"]] == ["M", "F", "M", "F"]
