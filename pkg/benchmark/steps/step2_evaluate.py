#!/usr/bin/env python3
"""
Étape 2: Évaluation LOO de chaque méthode sur chaque jeu simulé
- ITR global, précision globale, précision sur le stimulus haute fréquence, MRT
- Résultats cumulés dans benchmark/work/results.json
"""

import json
import sys

from common import RESULTS_PATH, load_benchmark_config, mode_argument, seed_dir, seeds_for
from tqdm import tqdm

from bifb.config import default_jobs, load_environment
from bifb.data_model import PreprocessConfig, load_dataset
from bifb.errors import BifbError
from bifb.evaluation import evaluate
from bifb.logging_setup import setup_logging
from bifb.pipeline import MethodConfig


def load_results() -> dict:
    if RESULTS_PATH.exists():
        with open(RESULTS_PATH, 'r', encoding='utf-8') as f:
            return json.load(f)
    return {}


def main():
    """Point d'entrée principal"""
    mode = mode_argument()
    load_environment()
    setup_logging()
    print(f"=== ÉTAPE 2: Évaluation ({mode}) ===")

    config = load_benchmark_config()
    preprocess = PreprocessConfig.from_dict(config["preprocess"])
    methods = {label: MethodConfig.from_dict(m) for label, m in config["methods"].items()}
    high_hz = config["high_frequency_hz"]
    results = load_results()

    try:
        jobs = default_jobs()
        for seed in tqdm(seeds_for(config, mode), desc="Graines"):
            dataset = load_dataset(seed_dir(seed))
            per_method = {}
            for label, method in methods.items():
                _, report = evaluate(dataset, method, preprocess, n_jobs=jobs)
                per_method[label] = {
                    "itr_bits_per_min": report.pooled.itr_bits_per_min,
                    "accuracy": report.pooled.accuracy,
                    "high_frequency_accuracy": report.class_accuracy(high_hz),
                    "mrt_s": report.pooled.mrt_s,
                }
            results[str(seed)] = per_method
    except BifbError as e:
        print(f"❌ Erreur dans l'étape 2: {e}")
        sys.exit(e.exit_code)

    RESULTS_PATH.parent.mkdir(parents=True, exist_ok=True)
    with open(RESULTS_PATH, 'w', encoding='utf-8') as f:
        json.dump(results, f, indent=2, ensure_ascii=False, sort_keys=True)
    print(f"✅ Étape 2 terminée: résultats dans {RESULTS_PATH}")


if __name__ == "__main__":
    main()
