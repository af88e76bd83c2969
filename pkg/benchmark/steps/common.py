#!/usr/bin/env python3
"""
Outils partagés par les étapes du benchmark (chemins, configuration, graines)
"""

import json
import sys
from pathlib import Path
from typing import Dict, List

BASE_DIR = Path(__file__).parent.parent.parent
if str(BASE_DIR) not in sys.path:
    sys.path.insert(0, str(BASE_DIR))

CONFIG_PATH = BASE_DIR / "configs" / "benchmark.json"
WORK_DIR = BASE_DIR / "benchmark" / "work"
RESULTS_PATH = WORK_DIR / "results.json"
ACCEPTANCE_PATH = WORK_DIR / "acceptance.json"


def load_benchmark_config() -> Dict:
    with open(CONFIG_PATH, 'r', encoding='utf-8') as f:
        return json.load(f)


def seeds_for(config: Dict, mode: str) -> List[int]:
    return list(config["seeds"][mode])


def seed_dir(seed: int) -> Path:
    return WORK_DIR / f"seed_{seed:02d}"


def mode_argument() -> str:
    """--mode quick|full (quick par défaut)"""
    import argparse
    parser = argparse.ArgumentParser()
    parser.add_argument("--mode", choices=["quick", "full"], default="quick")
    return parser.parse_args().mode
