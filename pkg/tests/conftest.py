"""
Fixtures partagées : petit jeu synthétique (2 sujets × 3 stimuli × 3 répétitions)
écrit dans un répertoire temporaire, et configurations d'apprentissage courtes.
"""

import json

import pytest

from bifb.classify import TrainConfig
from bifb.data_model import PreprocessConfig, save_dataset
from bifb.pipeline import MethodConfig
from bifb.synth import SynthConfig, simulate_dataset

STIMULI = (8.0, 14.0, 28.0)


@pytest.fixture(autouse=True)
def isolated_logs(tmp_path, monkeypatch):
    """Les logs des points d'entrée vont dans le répertoire temporaire du test"""
    monkeypatch.setenv("BIFB_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.delenv("BIFB_JOBS", raising=False)


@pytest.fixture(scope="session")
def small_synth_config():
    return SynthConfig(
        name="test-small",
        stimulus_frequencies_hz=STIMULI,
        sampling_rate_hz=256.0,
        duration_s=6.0,
        n_subjects=2,
        repetitions=3,
        channel_names=("Oz", "O1", "Cz"),
        snr_scale=3.0,
        subject_snr_spread=0.0,
        seed=11,
    )


@pytest.fixture(scope="session")
def small_dataset(small_synth_config):
    return simulate_dataset(small_synth_config)


@pytest.fixture
def dataset_dir(tmp_path, small_dataset):
    save_dataset(small_dataset, tmp_path / "dataset")
    return tmp_path / "dataset"


@pytest.fixture
def preprocess_cfg():
    return PreprocessConfig(bandpass_low_hz=6.0, bandpass_high_hz=35.0, analysis_channel="Oz")


@pytest.fixture
def fast_train():
    return TrainConfig(max_iterations=300)


@pytest.fixture
def bifb_cfg(fast_train):
    return MethodConfig(name="bifb", train=fast_train)


@pytest.fixture
def write_config(tmp_path):
    """Écrit un dictionnaire de configuration en JSON et renvoie son chemin"""
    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        return path
    return _write
