#!/usr/bin/env python3
"""
Étape 3: Vérification des critères qualitatifs sur l'ensemble des graines
- (a) précision BIFB au stimulus haute fréquence > PSDA et > CCA
- (b) ITR global BIFB ≥ ITR global UF
- (c) ITR global BIFB ≥ ITR global PSDA
- (d) précision moyenne de PSDA au stimulus haute fréquence ≤ ``max_psda_high_frequency_accuracy``
Les critères (a) à (c) doivent tenir sur au moins ``min_pass_fraction`` des graines.
"""

import json
import math
import sys
from typing import Dict

from common import ACCEPTANCE_PATH, RESULTS_PATH, load_benchmark_config, mode_argument, seeds_for


def _itr(entry: Dict) -> float:
    value = entry["itr_bits_per_min"]
    return 0.0 if value is None else value


def check_seed(per_method: Dict) -> Dict[str, bool]:
    bifb = per_method["bifb"]
    return {
        "a_high_frequency": (bifb["high_frequency_accuracy"] > per_method["psda"]["high_frequency_accuracy"]
                             and bifb["high_frequency_accuracy"] > per_method["cca"]["high_frequency_accuracy"]),
        "b_bifb_vs_uf": _itr(bifb) >= _itr(per_method["uf"]),
        "c_bifb_vs_psda": _itr(bifb) >= _itr(per_method["psda"]),
    }


def main():
    """Point d'entrée principal"""
    mode = mode_argument()
    print(f"=== ÉTAPE 3: Critères d'acceptation ({mode}) ===")

    config = load_benchmark_config()
    if not RESULTS_PATH.exists():
        print(f"❌ {RESULTS_PATH} introuvable: lancer l'étape 2")
        sys.exit(1)
    with open(RESULTS_PATH, 'r', encoding='utf-8') as f:
        results = json.load(f)

    seeds = [s for s in seeds_for(config, mode) if str(s) in results]
    if not seeds:
        print("❌ Aucun résultat pour les graines de ce mode")
        sys.exit(1)
    required = math.ceil(config["min_pass_fraction"] * len(seeds))

    print(f"\n{'Graine':8s} {'ITR bifb':>10s} {'ITR uf':>10s} {'ITR psda':>10s} {'ITR cca':>10s} "
          f"{'HF bifb':>8s} {'HF psda':>8s} {'HF cca':>8s}")
    passes = {"a_high_frequency": 0, "b_bifb_vs_uf": 0, "c_bifb_vs_psda": 0}
    psda_high = []
    for seed in seeds:
        per_method = results[str(seed)]
        psda_high.append(per_method["psda"]["high_frequency_accuracy"])
        print(f"{seed:<8d} " + " ".join(f"{_itr(per_method[m]):10.3f}" for m in ("bifb", "uf", "psda", "cca"))
              + " " + " ".join(f"{100 * per_method[m]['high_frequency_accuracy']:8.1f}"
                               for m in ("bifb", "psda", "cca")))
        for name, ok in check_seed(per_method).items():
            passes[name] += int(ok)

    print(f"\n📊 RÉSUMÉ ({required}/{len(seeds)} graines requises)")
    for name, count in passes.items():
        status = "✅" if count >= required else "❌"
        print(f"  {status} {name:20s}: {count}/{len(seeds)}")
    psda_mean = sum(psda_high) / len(psda_high)
    psda_ok = psda_mean <= config["max_psda_high_frequency_accuracy"]
    print(f"  {'✅' if psda_ok else '❌'} {'d_psda_high_mean':20s}: {100 * psda_mean:.1f}% "
          f"(max {100 * config['max_psda_high_frequency_accuracy']:.0f}%)")

    summary = {
        "mode": mode,
        "seeds": seeds,
        "required": required,
        "passes": passes,
        "psda_high_frequency_mean": psda_mean,
        "accepted": psda_ok and all(c >= required for c in passes.values()),
    }
    with open(ACCEPTANCE_PATH, 'w', encoding='utf-8') as f:
        json.dump(summary, f, indent=2, ensure_ascii=False)

    if not summary["accepted"]:
        print("⚠️ Critères non satisfaits")
        sys.exit(1)
    print("✅ Étape 3 terminée: critères satisfaits")


if __name__ == "__main__":
    main()
