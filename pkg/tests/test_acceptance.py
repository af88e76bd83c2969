"""
Reproduction qualitative sur le benchmark synthétique (20 graines du mode full) :
- (a) BIFB reconnaît mieux le stimulus de 28 Hz que PSDA et CCA
- (b) ITR global BIFB ≥ UF
- (c) ITR global BIFB ≥ PSDA
Chaque critère doit tenir sur ⌈min_pass_fraction·20⌉ = 18 graines, et la précision
moyenne de PSDA à 28 Hz doit rester ≤ max_psda_high_frequency_accuracy.

Long : LOO complet de quatre méthodes sur 20 graines (``pytest -m "not slow"`` pour l'ignorer).
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from bifb.data_model import PreprocessConfig
from bifb.evaluation import evaluate
from bifb.pipeline import MethodConfig
from bifb.synth import SynthConfig, simulate_dataset

BENCHMARK_CONFIG = Path(__file__).parent.parent / "configs" / "benchmark.json"


@pytest.fixture(scope="module")
def benchmark():
    with open(BENCHMARK_CONFIG, 'r', encoding='utf-8') as f:
        return json.load(f)


def _evaluate_seed(benchmark, seed):
    dataset = simulate_dataset(SynthConfig.from_dict({**benchmark["synth"], "seed": seed}))
    preprocess = PreprocessConfig.from_dict(benchmark["preprocess"])
    reports = {}
    for label, method in benchmark["methods"].items():
        _, reports[label] = evaluate(dataset, MethodConfig.from_dict(method), preprocess, n_jobs=-1)
    return reports


def _itr(report):
    value = report.pooled.itr_bits_per_min
    return 0.0 if value is None else value


def test_thresholds(benchmark):
    seeds = benchmark["seeds"]["full"]
    assert len(seeds) == 20
    assert math.ceil(benchmark["min_pass_fraction"] * len(seeds)) == 18
    assert benchmark["max_psda_high_frequency_accuracy"] == 0.6


@pytest.mark.slow
def test_qualitative_ordering(benchmark):
    high_hz = benchmark["high_frequency_hz"]
    seeds = benchmark["seeds"]["full"]
    required = math.ceil(benchmark["min_pass_fraction"] * len(seeds))
    passes = {"high_frequency": 0, "bifb_vs_uf": 0, "bifb_vs_psda": 0}
    psda_high = []

    for seed in seeds:
        reports = _evaluate_seed(benchmark, seed)
        bifb_high = reports["bifb"].class_accuracy(high_hz)
        psda_high.append(reports["psda"].class_accuracy(high_hz))
        passes["high_frequency"] += int(bifb_high > psda_high[-1]
                                        and bifb_high > reports["cca"].class_accuracy(high_hz))
        passes["bifb_vs_uf"] += int(_itr(reports["bifb"]) >= _itr(reports["uf"]))
        passes["bifb_vs_psda"] += int(_itr(reports["bifb"]) >= _itr(reports["psda"]))

    for criterion, count in passes.items():
        assert count >= required, f"{criterion}: {count}/{len(seeds)} graines (requis {required})"
    assert np.mean(psda_high) <= benchmark["max_psda_high_frequency_accuracy"]
