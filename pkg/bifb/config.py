"""
Configuration des expériences : fichier JSON → dataclasses, surcharges ``--set`` et ``.env.local``.
"""

import copy
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from dotenv import load_dotenv
from typing_extensions import Self

from .data_model import PreprocessConfig
from .errors import ConfigError, MissingFile
from .evaluation import GridSpec
from .pipeline import MethodConfig
from .synth import SynthConfig

logger = logging.getLogger(__name__)

ENV_FILE = ".env.local"
DEFAULT_OUTPUT_DIR = "runs/default"
SECTIONS = ("dataset", "method", "preprocess", "output_dir", "synth", "grid", "refine_factors")


def load_environment(env_file: str = ENV_FILE) -> None:
    """Charge les variables d'environnement locales (si le fichier existe)"""
    load_dotenv(env_file)


def default_jobs() -> int:
    value = os.getenv("BIFB_JOBS", "1")
    try:
        jobs = int(value)
    except ValueError:
        raise ConfigError(f"BIFB_JOBS invalide: '{value}'")
    if jobs == 0:
        raise ConfigError("BIFB_JOBS ne peut pas valoir 0")
    return jobs


def parse_override(text: str) -> Tuple[List[str], Any]:
    """``a.b.c=valeur`` → (['a', 'b', 'c'], valeur JSON ou chaîne brute)"""
    if "=" not in text:
        raise ConfigError(f"Surcharge invalide '{text}' (attendu clé=valeur)")
    key, raw = text.split("=", 1)
    path = [part for part in key.strip().split(".") if part]
    if not path:
        raise ConfigError(f"Clé vide dans la surcharge '{text}'")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def apply_overrides(data: Dict, overrides: Sequence[str]) -> Dict:
    """Copie de ``data`` avec les surcharges appliquées (sections créées au besoin)"""
    result = copy.deepcopy(data)
    for text in overrides:
        path, value = parse_override(text)
        node = result
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"'{part}' n'est pas une section dans la surcharge '{text}'")
            node = child
        node[path[-1]] = value
        logger.debug(f"Surcharge {'.'.join(path)} = {value!r}")
    return result


def load_config_dict(path) -> Dict:
    path = Path(path)
    if not path.exists():
        raise MissingFile(f"Fichier de configuration introuvable: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON invalide dans {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: un objet JSON est attendu")
    return data


@dataclass
class ExperimentConfig:
    dataset: Optional[str] = None
    method: MethodConfig = field(default_factory=MethodConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    output_dir: str = DEFAULT_OUTPUT_DIR
    synth: Optional[SynthConfig] = None
    grid: Optional[GridSpec] = None
    refine_factors: Optional[List[float]] = None

    @classmethod
    def from_dict(cls, data: Dict) -> Self:
        unknown = set(data) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"Sections inconnues: {', '.join(sorted(unknown))}")
        refine = data.get("refine_factors")
        if refine is not None and (
            not isinstance(refine, list) or not all(isinstance(f, (int, float)) and f > 0 for f in refine)
        ):
            raise ConfigError("refine_factors doit être une liste de facteurs > 0")
        return cls(
            dataset=data.get("dataset"),
            method=MethodConfig.from_dict(data.get("method", {})),
            preprocess=PreprocessConfig.from_dict(data.get("preprocess")),
            output_dir=data.get("output_dir", DEFAULT_OUTPUT_DIR),
            synth=SynthConfig.from_dict(data["synth"]) if data.get("synth") is not None else None,
            grid=GridSpec.from_dict(data["grid"]) if data.get("grid") is not None else None,
            refine_factors=refine,
        )

    def to_dict(self) -> Dict:
        data: Dict[str, Any] = {
            "dataset": self.dataset,
            "method": self.method.to_dict(),
            "preprocess": self.preprocess.to_dict(),
            "output_dir": self.output_dir,
        }
        if self.synth is not None:
            data["synth"] = self.synth.to_dict()
        if self.grid is not None:
            data["grid"] = self.grid.to_dict()
        if self.refine_factors is not None:
            data["refine_factors"] = self.refine_factors
        return data

    def require_dataset(self) -> Path:
        if not self.dataset:
            raise ConfigError("Aucun jeu de données ('dataset') dans la configuration")
        return Path(self.dataset)


def load_experiment(path, overrides: Sequence[str] = ()) -> ExperimentConfig:
    return ExperimentConfig.from_dict(apply_overrides(load_config_dict(path), overrides))
