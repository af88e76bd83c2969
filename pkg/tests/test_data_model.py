"""
Tests du format canonique (manifest + CSV) et du pré-traitement
"""

import json

import numpy as np
import pytest

from bifb.data_model import (
    DatasetManifest, PreprocessConfig, Recording, TrialEntry, dataset_fingerprint,
    load_dataset, preprocess, save_dataset,
)
from bifb.errors import (
    BandEdgesAboveNyquist, ChannelMismatch, ConfigError, LabelNotInStimulusSet, MalformedManifest,
    MissingFile, UnknownChannel,
)
from bifb.synth import SynthConfig, simulate_dataset


def _manifest(trials, stimuli=(8.0, 14.0, 28.0)):
    return DatasetManifest(
        name="m",
        stimulus_frequencies_hz=stimuli,
        sampling_rate_hz=256.0,
        channel_names=("Oz",),
        trials=tuple(trials),
    )


def _sine_recording(freq_hz, fs=256.0, duration_s=10.0, channels=("Oz",)):
    t = np.arange(int(fs * duration_s)) / fs
    samples = np.vstack([np.sin(2 * np.pi * freq_hz * t) for _ in channels])
    return Recording(samples=samples, sampling_rate_hz=fs, channel_names=channels,
                     stimulus_freq_hz=8.0, subject_id="S01", trial_id="T1")


def _rms(x):
    return float(np.sqrt(np.mean(np.square(x))))


class TestManifest:

    def test_full_dataset_loads_every_trial(self, tmp_path):
        cfg = SynthConfig(duration_s=1.0, n_subjects=4, repetitions=5, seed=3)
        save_dataset(simulate_dataset(cfg), tmp_path)

        dataset = load_dataset(tmp_path)

        assert len(dataset.recordings) == 60
        assert dataset.subjects == ["S01", "S02", "S03", "S04"]

    def test_empty_trial_list_rejected(self):
        with pytest.raises(MalformedManifest):
            _manifest([])

    def test_label_outside_stimulus_set_rejected(self):
        with pytest.raises(LabelNotInStimulusSet):
            _manifest([TrialEntry("T1", "S01", 9.0, "trials/T1.csv")])

    def test_duplicate_trial_ids_rejected(self):
        entry = TrialEntry("T1", "S01", 8.0, "trials/T1.csv")
        with pytest.raises(MalformedManifest):
            _manifest([entry, entry])

    def test_unsorted_stimuli_rejected(self):
        with pytest.raises(MalformedManifest):
            _manifest([TrialEntry("T1", "S01", 8.0, "trials/T1.csv")], stimuli=(14.0, 8.0))

    def test_round_trip_is_exact(self, tmp_path, small_dataset):
        save_dataset(small_dataset, tmp_path)
        loaded = load_dataset(tmp_path / "manifest.json")

        original = {r.trial_id: r for r in small_dataset.recordings}
        for rec in loaded.recordings:
            assert np.array_equal(rec.samples, original[rec.trial_id].samples)
            assert rec.seed == original[rec.trial_id].seed
        assert dataset_fingerprint(loaded) == dataset_fingerprint(small_dataset)

    def test_header_mismatch_rejected(self, dataset_dir):
        manifest = json.loads((dataset_dir / "manifest.json").read_text(encoding="utf-8"))
        trial_file = dataset_dir / manifest["trials"][0]["file"]
        lines = trial_file.read_text(encoding="utf-8").splitlines()
        lines[0] = "Oz,O2,Cz"
        trial_file.write_text("\n".join(lines) + "\n", encoding="utf-8")

        with pytest.raises(ChannelMismatch):
            load_dataset(dataset_dir)

    def test_missing_trial_file(self, dataset_dir):
        manifest = json.loads((dataset_dir / "manifest.json").read_text(encoding="utf-8"))
        (dataset_dir / manifest["trials"][0]["file"]).unlink()

        with pytest.raises(MissingFile):
            load_dataset(dataset_dir)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(MissingFile):
            load_dataset(tmp_path / "nowhere")

    def test_invalid_json(self, tmp_path):
        (tmp_path / "manifest.json").write_text("{pas du json", encoding="utf-8")
        with pytest.raises(MalformedManifest):
            load_dataset(tmp_path)

    def test_fingerprint_changes_with_samples(self, small_dataset):
        rec = small_dataset.recordings[0]
        altered = type(small_dataset)(
            manifest=small_dataset.manifest,
            recordings=(rec.with_samples(rec.samples + 1e-6),) + small_dataset.recordings[1:],
        )
        assert dataset_fingerprint(altered) != dataset_fingerprint(small_dataset)


class TestPreprocess:

    def test_rereference_zeroes_reference_channel(self):
        rng = np.random.default_rng(0)
        rec = Recording(samples=rng.standard_normal((2, 1024)), sampling_rate_hz=256.0,
                        channel_names=("Oz", "Cz"), stimulus_freq_hz=8.0, subject_id="S01", trial_id="T1")

        out = preprocess(rec, PreprocessConfig(reference_channel="Cz"))

        assert np.all(out.channel("Cz") == 0.0)
        np.testing.assert_array_equal(out.channel("Oz"), rec.channel("Oz") - rec.channel("Cz"))

    def test_rereference_idempotent(self):
        rng = np.random.default_rng(1)
        rec = Recording(samples=rng.standard_normal((2, 512)), sampling_rate_hz=256.0,
                        channel_names=("Oz", "Cz"), stimulus_freq_hz=8.0, subject_id="S01", trial_id="T1")
        cfg = PreprocessConfig(reference_channel="Cz")

        once = preprocess(rec, cfg)
        twice = preprocess(once, cfg)

        np.testing.assert_array_equal(once.samples, twice.samples)

    def test_bandpass_rejects_50hz(self):
        rec = _sine_recording(50.0)
        out = preprocess(rec, PreprocessConfig(bandpass_low_hz=6.0, bandpass_high_hz=35.0))

        # hors bords (transitoires du filtrage aller-retour)
        core = slice(512, -512)
        assert _rms(out.channel("Oz")[core]) < 0.02 * _rms(rec.channel("Oz")[core])

    def test_bandpass_keeps_20hz(self):
        rec = _sine_recording(20.0)
        out = preprocess(rec, PreprocessConfig(bandpass_low_hz=6.0, bandpass_high_hz=35.0))

        core = slice(512, -512)
        assert _rms(out.channel("Oz")[core]) == pytest.approx(_rms(rec.channel("Oz")[core]), rel=0.05)

    def test_notch_removes_line_noise(self):
        rec = _sine_recording(50.0)
        out = preprocess(rec, PreprocessConfig(notch_hz=50.0))

        core = slice(512, -512)
        assert _rms(out.channel("Oz")[core]) < 0.02 * _rms(rec.channel("Oz")[core])

    def test_input_not_modified(self):
        rec = _sine_recording(20.0)
        before = rec.samples.copy()
        preprocess(rec, PreprocessConfig(bandpass_low_hz=6.0, bandpass_high_hz=35.0))
        np.testing.assert_array_equal(rec.samples, before)

    def test_band_edge_above_nyquist(self):
        with pytest.raises(BandEdgesAboveNyquist):
            preprocess(_sine_recording(20.0), PreprocessConfig(bandpass_low_hz=6.0, bandpass_high_hz=200.0))

    def test_inverted_band(self):
        with pytest.raises(ConfigError):
            preprocess(_sine_recording(20.0), PreprocessConfig(bandpass_low_hz=35.0, bandpass_high_hz=6.0))

    def test_unknown_reference_channel(self):
        with pytest.raises(UnknownChannel):
            preprocess(_sine_recording(20.0), PreprocessConfig(reference_channel="Cz"))
