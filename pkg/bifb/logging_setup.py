"""
Configuration du logging (fichier + console) pour les points d'entrée.

La bibliothèque elle-même ne configure jamais le logging : seuls la CLI et
les scripts du benchmark appellent ``setup_logging``.
"""

import logging
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional

LOG_FORMAT = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'
MAX_LOG_FILES = 10


def cleanup_old_logs(logs_dir: Path, keep: int = MAX_LOG_FILES) -> int:
    """Supprime les anciens logs (garde seulement les ``keep`` plus récents)"""
    if not logs_dir.exists():
        return 0

    log_files = list(logs_dir.glob("*.log"))
    if len(log_files) <= keep:
        return 0

    # Plus récent en premier
    log_files.sort(key=lambda x: x.stat().st_mtime, reverse=True)

    removed = 0
    for log_file in log_files[keep:]:
        try:
            log_file.unlink()
            removed += 1
        except OSError as e:
            print(f"⚠️ Erreur suppression {log_file.name}: {e}", file=sys.stderr)
    return removed


def setup_logging(verbose: bool = False, logs_dir: Optional[Path] = None) -> logging.Logger:
    """Configure le système de logging avec fichier et console"""
    if logs_dir is None:
        logs_dir = Path(os.getenv("BIFB_LOG_DIR", "logs"))

    handlers = [logging.StreamHandler(sys.stderr)]
    log_filename = None
    try:
        logs_dir.mkdir(parents=True, exist_ok=True)
        cleanup_old_logs(logs_dir, keep=MAX_LOG_FILES - 1)
        log_filename = logs_dir / f"bifb_{datetime.now().strftime('%Y%m%d')}.log"
        handlers.insert(0, logging.FileHandler(log_filename, encoding='utf-8'))
    except OSError:
        # Répertoire de logs non inscriptible : console seulement
        pass

    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )

    logger = logging.getLogger("bifb")
    if log_filename is not None:
        logger.debug(f"Logging configuré - Fichier: {log_filename}")
    return logger
