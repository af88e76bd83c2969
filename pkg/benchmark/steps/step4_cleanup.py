#!/usr/bin/env python3
"""
Étape 4: Nettoyage
- Supprime les jeux simulés (les résultats JSON sont conservés)
- Garde seulement les 10 logs les plus récents
"""

import shutil

from common import BASE_DIR, WORK_DIR

from bifb.logging_setup import cleanup_old_logs


def cleanup_datasets() -> int:
    """Supprime les répertoires seed_* du répertoire de travail"""
    if not WORK_DIR.exists():
        return 0
    removed = 0
    for seed_dir in sorted(WORK_DIR.glob("seed_*")):
        try:
            shutil.rmtree(seed_dir)
            removed += 1
        except OSError as e:
            print(f"⚠️ Erreur suppression {seed_dir.name}: {e}")
    return removed


def main():
    """Point d'entrée principal"""
    print("=== ÉTAPE 4: Nettoyage ===")
    removed = cleanup_datasets()
    print(f"✅ {removed} jeux simulés supprimés" if removed else "✅ Aucun jeu simulé à supprimer")

    logs = cleanup_old_logs(BASE_DIR / "logs")
    print(f"✅ {logs} anciens logs supprimés" if logs else "✅ Aucun ancien log à nettoyer")


if __name__ == "__main__":
    main()
