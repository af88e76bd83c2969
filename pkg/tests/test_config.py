"""
Tests de la configuration : sections JSON, surcharges --set, variables d'environnement
"""

import pytest

from bifb.config import (
    ExperimentConfig, apply_overrides, default_jobs, load_config_dict, load_experiment, parse_override,
)
from bifb.data_model import DatasetManifest, PreprocessConfig, TrialEntry
from bifb.errors import ConfigError, MissingFile, UnknownChannel
from bifb.pipeline import CcaRecognizer, FilterBankRecognizer, MethodConfig, PsdaRecognizer, make_recognizer


def _manifest(sampling_rate_hz=256.0, channels=("Oz", "O1", "Cz")):
    return DatasetManifest(
        name="m",
        stimulus_frequencies_hz=(8.0, 14.0, 28.0),
        sampling_rate_hz=sampling_rate_hz,
        channel_names=channels,
        trials=(TrialEntry("T1", "S01", 8.0, "trials/T1.csv"),),
    )


class TestOverrides:

    def test_json_values(self):
        assert parse_override("method.gamma=0.5") == (["method", "gamma"], 0.5)
        assert parse_override("method.cca_channels=[\"Oz\",\"O1\"]") == (["method", "cca_channels"], ["Oz", "O1"])

    def test_raw_string_value(self):
        assert parse_override("method.name=psda") == (["method", "name"], "psda")

    def test_missing_equal_sign(self):
        with pytest.raises(ConfigError):
            parse_override("method.gamma")

    def test_nested_sections_created(self):
        data = apply_overrides({"method": {"name": "bifb"}}, ["method.train.lambda=1.0", "output_dir=runs/x"])
        assert data == {"method": {"name": "bifb", "train": {"lambda": 1.0}}, "output_dir": "runs/x"}

    def test_original_untouched(self):
        data = {"method": {"name": "bifb"}}
        apply_overrides(data, ["method.name=uf"])
        assert data == {"method": {"name": "bifb"}}

    def test_scalar_is_not_a_section(self):
        with pytest.raises(ConfigError):
            apply_overrides({"method": "bifb"}, ["method.gamma=1"])


class TestEnvironment:

    def test_default_jobs(self, monkeypatch):
        assert default_jobs() == 1
        monkeypatch.setenv("BIFB_JOBS", "4")
        assert default_jobs() == 4

    def test_invalid_jobs(self, monkeypatch):
        monkeypatch.setenv("BIFB_JOBS", "plusieurs")
        with pytest.raises(ConfigError):
            default_jobs()


class TestExperimentConfig:

    def test_load_with_overrides(self, write_config):
        path = write_config({"dataset": "data/a", "method": {"name": "bifb"}})
        cfg = load_experiment(path, ["method.gamma=0.5", "method.decision.t_required=2"])
        assert cfg.method.gamma == 0.5
        assert cfg.method.decision.t_required == 2
        assert cfg.output_dir == "runs/default"

    def test_unknown_section(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"methods": {}})

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            load_config_dict(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("[1, 2", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config_dict(path)

    def test_dataset_required(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({}).require_dataset()

    def test_round_trip(self):
        data = {
            "dataset": "data/a",
            "method": {"name": "uf", "half_width_hz": 0.5},
            "preprocess": {"bandpass_low_hz": 6.0, "bandpass_high_hz": 35.0},
            "grid": {"axes": {"half_width_hz": [0.5, 1.0]}},
        }
        cfg = ExperimentConfig.from_dict(data)
        again = ExperimentConfig.from_dict(cfg.to_dict())
        assert again.method.to_dict() == cfg.method.to_dict()
        assert again.preprocess == cfg.preprocess
        assert again.grid.axes == cfg.grid.axes

    def test_bad_refine_factors(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"refine_factors": [1.0, -2.0]})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"refine_factors": [1.0, "2"]})


class TestMethodConfig:

    def test_unknown_method(self):
        with pytest.raises(ConfigError):
            MethodConfig.from_dict({"name": "svm"})

    def test_unknown_field(self):
        with pytest.raises(ConfigError):
            MethodConfig.from_dict({"name": "bifb", "gama": 1.0})

    def test_explicit_bank_requires_parameters(self):
        with pytest.raises(ConfigError):
            MethodConfig.from_dict({"name": "bifb", "filter_init": "explicit"})

    def test_lambda_alias(self):
        cfg = MethodConfig.from_dict({"name": "bifb", "train": {"lambda": 2.0}})
        assert cfg.train.lam == 2.0
        assert cfg.with_overrides({"lambda": 0.5}).train.lam == 0.5
        assert cfg.train.lam == 2.0

    def test_override_validated(self):
        with pytest.raises(ConfigError):
            MethodConfig().with_overrides({"overlap": 1.5})
        with pytest.raises(ConfigError):
            MethodConfig().with_overrides({"colour": 1})

    def test_mistyped_fields(self):
        with pytest.raises(ConfigError):
            MethodConfig.from_dict({"name": "bifb", "segment_length_s": "2"})
        with pytest.raises(ConfigError):
            MethodConfig.from_dict({"name": "bifb", "train": {"lambda": "0.1"}})
        with pytest.raises(ConfigError):
            MethodConfig().with_overrides({"overlap": "0.5"})
        with pytest.raises(ConfigError):
            MethodConfig().with_overrides({"lambda": "0.1"})

    def test_hyperparameters_per_method(self):
        assert "gamma" in MethodConfig(name="bifb").hyperparameters()
        assert "half_width_hz" in MethodConfig(name="psda").hyperparameters()
        assert "lam" not in MethodConfig(name="cca").hyperparameters()


class TestRecognizers:

    def test_dispatch(self):
        manifest = _manifest()
        assert isinstance(make_recognizer(MethodConfig(name="bifb"), manifest), FilterBankRecognizer)
        assert isinstance(make_recognizer(MethodConfig(name="uf"), manifest), FilterBankRecognizer)
        assert isinstance(make_recognizer(MethodConfig(name="psda_peak"), manifest), PsdaRecognizer)
        assert isinstance(make_recognizer(MethodConfig(name="cca"), manifest), CcaRecognizer)

    def test_bank_above_nyquist_is_config_error(self):
        # 56 Hz + demi-largeur > 57 Hz = Nyquist à 114 Hz
        with pytest.raises(ConfigError):
            make_recognizer(MethodConfig(name="uf", half_width_hz=2.0), _manifest(sampling_rate_hz=114.0))

    def test_cca_harmonics_above_nyquist(self):
        with pytest.raises(ConfigError):
            make_recognizer(MethodConfig(name="cca", n_harmonics=5), _manifest())

    def test_cca_channels_exclude_reference(self):
        recognizer = make_recognizer(MethodConfig(name="cca"), _manifest(), PreprocessConfig(reference_channel="Cz"))
        assert recognizer.channels() == ["Oz", "O1"]

    def test_cca_unknown_channel(self):
        recognizer = make_recognizer(MethodConfig(name="cca", cca_channels=["Pz"]), _manifest())
        with pytest.raises(UnknownChannel):
            recognizer.channels()
