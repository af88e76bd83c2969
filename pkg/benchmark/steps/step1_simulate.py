#!/usr/bin/env python3
"""
Étape 1: Simulation des jeux de données du benchmark (une graine maîtresse par jeu)
"""

import sys

from common import load_benchmark_config, mode_argument, seed_dir, seeds_for

from bifb.data_model import MANIFEST_NAME, save_dataset
from bifb.errors import BifbError
from bifb.logging_setup import setup_logging
from bifb.synth import SynthConfig, simulate_dataset


def main():
    """Point d'entrée principal"""
    mode = mode_argument()
    setup_logging()
    print(f"=== ÉTAPE 1: Simulation ({mode}) ===")

    config = load_benchmark_config()
    seeds = seeds_for(config, mode)
    try:
        for seed in seeds:
            out_dir = seed_dir(seed)
            if (out_dir / MANIFEST_NAME).exists():
                print(f"⏭️ Graine {seed}: jeu déjà présent")
                continue
            synth = SynthConfig.from_dict({**config["synth"], "seed": seed})
            save_dataset(simulate_dataset(synth), out_dir)
            print(f"✅ Graine {seed}: {synth.n_trials} essais")
    except BifbError as e:
        print(f"❌ Erreur dans l'étape 1: {e}")
        sys.exit(e.exit_code)

    print(f"✅ Étape 1 terminée: {len(seeds)} jeux de données")


if __name__ == "__main__":
    main()
