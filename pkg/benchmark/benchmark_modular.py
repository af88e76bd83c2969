#!/usr/bin/env python3
"""
Benchmark modulaire multi-graines
- chaque étape est un script autonome de benchmark/steps/
- quick : 3 graines, jeux conservés pour inspection
- full  : 20 graines puis nettoyage
"""

import argparse
import subprocess
import sys
from pathlib import Path

from dotenv import load_dotenv

sys.path.insert(0, str(Path(__file__).parent.parent))

from bifb.logging_setup import cleanup_old_logs  # noqa: E402


class ModularBenchmark:
    def __init__(self, base_dir: str = "."):
        self.base_dir = Path(base_dir)
        self.steps_dir = self.base_dir / "benchmark" / "steps"

        self.all_steps = {
            "step0": "step0_dependencies.py",
            "step1": "step1_simulate.py",
            "step2": "step2_evaluate.py",
            "step3": "step3_check_acceptance.py",
            "step4": "step4_cleanup.py",
        }

        self.modes = {
            "quick": ["step0", "step1", "step2", "step3"],
            "full": ["step0", "step1", "step2", "step3", "step4"],
        }

        # Étapes qui dépendent du jeu de graines du mode
        self.seeded_steps = {"step1", "step2", "step3"}

    def run_step(self, step_name: str, mode: str = "quick") -> bool:
        """Exécute une étape spécifique"""
        if step_name not in self.all_steps:
            print(f"❌ Étape inconnue: {step_name}")
            return False

        script_path = self.steps_dir / self.all_steps[step_name]
        if not script_path.exists():
            print(f"❌ Script non trouvé: {script_path}")
            return False

        print(f"\n{'='*60}")
        print(f"🔄 Exécution de {step_name}")
        print(f"{'='*60}")

        try:
            command = [sys.executable, str(script_path)]
            if step_name in self.seeded_steps:
                command += ["--mode", mode]
            result = subprocess.run(
                command,
                cwd=self.base_dir,
                capture_output=False,
                text=True
            )
        except OSError as e:
            print(f"❌ Erreur lors de l'exécution de {step_name}: {e}")
            return False

        if result.returncode == 0:
            print(f"✅ {step_name} terminée avec succès")
            return True
        print(f"❌ {step_name} échouée (code: {result.returncode})")
        return False

    def run_mode(self, mode: str) -> bool:
        """Exécute un mode de benchmark"""
        if mode not in self.modes:
            print(f"❌ Mode inconnu: {mode}")
            print(f"Modes disponibles: {list(self.modes.keys())}")
            return False

        removed = cleanup_old_logs(self.base_dir / "logs")
        if removed:
            print(f"🧹 {removed} anciens logs supprimés")

        steps = self.modes[mode]
        print(f"🚀 Début du benchmark {mode}")
        print(f"📋 Étapes à exécuter: {', '.join(steps)}")

        success_count = 0
        for step in steps:
            if self.run_step(step, mode):
                success_count += 1
            elif step in ("step0", "step1", "step2"):
                print(f"❌ Échec de l'étape {step}, arrêt")
                break
            else:
                print(f"⚠️ Échec de l'étape {step}, continuation...")

        print(f"\n{'='*60}")
        print(f"📊 RÉSUMÉ: {success_count}/{len(steps)} étapes réussies")
        print(f"{'='*60}")

        if success_count == len(steps):
            print(f"🎉 Benchmark {mode} terminé avec succès!")
            return True
        print(f"⚠️ Benchmark {mode} terminé avec des erreurs")
        return False

    def list_steps(self):
        """Liste toutes les étapes disponibles"""
        print("📋 Étapes disponibles:")
        for step, script in self.all_steps.items():
            print(f"  - {step}: {script}")

        print("\n📋 Modes disponibles:")
        for mode, steps in self.modes.items():
            print(f"  - {mode}: {', '.join(steps)}")


def main():
    """Point d'entrée principal"""
    parser = argparse.ArgumentParser(
        description="Benchmark d'acceptation multi-graines (BIFB vs UF, PSDA, CCA)",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exemples d'utilisation:
  python3 benchmark/benchmark_modular.py --mode quick          # 3 graines
  python3 benchmark/benchmark_modular.py --mode full           # 20 graines + nettoyage
  python3 benchmark/benchmark_modular.py --step step3          # Revérifier les critères
  python3 benchmark/benchmark_modular.py --list                # Lister les étapes
        """
    )

    parser.add_argument("--mode", choices=["quick", "full"], help="Mode de benchmark")
    parser.add_argument("--step", help="Exécuter une étape spécifique")
    parser.add_argument("--step-mode", choices=["quick", "full"], default="quick",
                        help="Jeu de graines utilisé avec --step")
    parser.add_argument("--list", action="store_true", help="Lister les étapes disponibles")
    parser.add_argument("--base-dir", default=".", help="Répertoire de base")

    args = parser.parse_args()
    load_dotenv('.env.local')

    benchmark = ModularBenchmark(args.base_dir)

    if args.list:
        benchmark.list_steps()
    elif args.step:
        success = benchmark.run_step(args.step, args.step_mode)
        sys.exit(0 if success else 1)
    elif args.mode:
        success = benchmark.run_mode(args.mode)
        sys.exit(0 if success else 1)
    else:
        parser.print_help()


if __name__ == "__main__":
    main()
