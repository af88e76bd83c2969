#!/usr/bin/env python3
"""
Étape 0: Vérification des dépendances
"""

import subprocess
import sys

REQUIRED_MODULES = ["numpy", "scipy", "pandas", "joblib", "tqdm", "dotenv", "typing_extensions"]


def check_module(module: str) -> bool:
    """Vérifie si un module est importable par l'interpréteur courant"""
    try:
        result = subprocess.run(
            [sys.executable, "-c", f"import {module}"],
            capture_output=True,
            text=True
        )
        return result.returncode == 0
    except OSError:
        return False


def main():
    """Point d'entrée principal"""
    print("=== ÉTAPE 0: Vérification des dépendances ===")

    missing = [m for m in REQUIRED_MODULES if not check_module(m)]
    if missing:
        print(f"❌ Modules manquants: {', '.join(missing)}")
        print("   pip install -r requirements.txt")
        sys.exit(1)

    print(f"✅ Étape 0 terminée: {len(REQUIRED_MODULES)} dépendances disponibles")


if __name__ == "__main__":
    main()
