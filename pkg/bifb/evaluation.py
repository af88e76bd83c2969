#!/usr/bin/env python3
"""
Évaluation des méthodes de reconnaissance
- ITR (bits/min), précision δ, temps moyen de reconnaissance (MRT)
- Validation croisée leave-one-out par sujet
- Recherche exhaustive sur grille (objectif : ITR global)
- Tests t appariés

Conventions :
- un essai sans décision compte comme une erreur dans δ
- le MRT ne moyenne que les essais décidés, s = 60 / MRT
"""

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.special import betainc
from tqdm import tqdm
from typing_extensions import Self

from .classify import OvaModel
from .data_model import Dataset, PreprocessConfig, preprocess_dataset
from .errors import (
    ConfigError, InvalidAccuracy, KTooSmall, LengthMismatch, MissingClass, NoDecisions, ZeroVariance,
)
from .pipeline import MethodConfig, PARAMETER_PATHS, PreparedTrial, Recognizer, TrialOutcome, make_recognizer

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Métriques
# ---------------------------------------------------------------------------

def itr(K: int, delta: float, s: float) -> float:
    """ITR = s·[log₂K + δ·log₂δ + (1−δ)·log₂((1−δ)/(K−1))], avec 0·log₂0 = 0"""
    if K < 2:
        raise KTooSmall(f"K doit être ≥ 2, reçu {K}")
    if not (0.0 <= delta <= 1.0) or math.isnan(delta):
        raise InvalidAccuracy(f"δ doit être dans [0, 1], reçu {delta}")
    if delta < 1.0 / K:
        logger.warning(f"⚠️ Précision {delta:.3f} sous le hasard (1/{K}) : ITR ramené à 0")
        return 0.0

    bits = math.log2(K)
    if delta > 0.0:
        bits += delta * math.log2(delta)
    if delta < 1.0:
        bits += (1.0 - delta) * math.log2((1.0 - delta) / (K - 1))
    return s * max(0.0, bits)


@dataclass
class Summary:
    method: str
    n_classes: int
    n_trials: int
    n_decided: int
    accuracy: float
    mrt_s: Optional[float]
    commands_per_min: Optional[float]
    itr_bits_per_min: Optional[float]
    per_class_accuracy: Dict[int, float] = field(default_factory=dict)

    @property
    def itr_available(self) -> bool:
        return self.itr_bits_per_min is not None

    def to_dict(self) -> Dict:
        return {
            "method": self.method,
            "n_classes": self.n_classes,
            "n_trials": self.n_trials,
            "n_decided": self.n_decided,
            "accuracy": self.accuracy,
            "mrt_s": self.mrt_s,
            "commands_per_min": self.commands_per_min,
            "itr_bits_per_min": self.itr_bits_per_min,
        }


def summarize(outcomes: Sequence[TrialOutcome], K: int) -> Summary:
    """δ, MRT, s et ITR d'un ensemble d'essais d'une même méthode"""
    if not outcomes:
        raise ConfigError("Aucun essai à résumer")
    methods = {o.method for o in outcomes}
    if len(methods) > 1:
        raise ConfigError(f"Résumé d'une seule méthode à la fois, reçu {sorted(methods)}")

    n = len(outcomes)
    correct = sum(o.correct for o in outcomes)
    decided = [o for o in outcomes if o.decided]
    per_class = {}
    for c in sorted({o.true_class for o in outcomes}):
        members = [o for o in outcomes if o.true_class == c]
        per_class[c] = sum(o.correct for o in members) / len(members)

    summary = Summary(
        method=methods.pop(),
        n_classes=K,
        n_trials=n,
        n_decided=len(decided),
        accuracy=correct / n,
        mrt_s=None,
        commands_per_min=None,
        itr_bits_per_min=None,
        per_class_accuracy=per_class,
    )
    if not decided:
        raise NoDecisions(f"Aucune décision sur {n} essais : MRT et ITR indéfinis", partial=summary)

    summary.mrt_s = float(np.mean([o.recognition_time_s for o in decided]))
    summary.commands_per_min = 60.0 / summary.mrt_s
    summary.itr_bits_per_min = itr(K, summary.accuracy, summary.commands_per_min)
    return summary


def _summary_or_partial(outcomes: Sequence[TrialOutcome], K: int) -> Summary:
    try:
        return summarize(outcomes, K)
    except NoDecisions as e:
        logger.warning(f"⚠️ {e}")
        return e.partial


@dataclass
class EvalReport:
    method: str
    class_frequencies_hz: Tuple[float, ...]
    hyperparameters: Dict[str, Any]
    per_subject: Dict[str, Summary]
    pooled: Summary

    @property
    def n_classes(self) -> int:
        return len(self.class_frequencies_hz)

    def class_accuracy(self, frequency_hz: float) -> float:
        """Précision globale sur les essais d'un stimulus donné"""
        for c, f in enumerate(self.class_frequencies_hz):
            if abs(f - frequency_hz) <= 1e-9:
                return self.pooled.per_class_accuracy.get(c, 0.0)
        raise ConfigError(f"{frequency_hz} Hz n'est pas un stimulus du rapport")


def build_report(outcomes: Sequence[TrialOutcome], class_frequencies_hz: Sequence[float],
                 hyperparameters: Optional[Dict[str, Any]] = None) -> EvalReport:
    """Résumés par sujet et global; un sujet sans décision garde δ sans ITR"""
    K = len(class_frequencies_hz)
    by_subject: Dict[str, List[TrialOutcome]] = {}
    for o in outcomes:
        by_subject.setdefault(o.subject_id, []).append(o)
    pooled = _summary_or_partial(outcomes, K)
    return EvalReport(
        method=pooled.method,
        class_frequencies_hz=tuple(class_frequencies_hz),
        hyperparameters=dict(hyperparameters or {}),
        per_subject={s: _summary_or_partial(by_subject[s], K) for s in sorted(by_subject)},
        pooled=pooled,
    )


# ---------------------------------------------------------------------------
# Validation croisée leave-one-out
# ---------------------------------------------------------------------------

def loo_folds(recordings: Sequence) -> List[Tuple[Any, List[Any]]]:
    """(essai exclu, essais d'entraînement) pour chaque essai"""
    return [(held_out, [r for j, r in enumerate(recordings) if j != i]) for i, held_out in enumerate(recordings)]


def _run_fold(recognizer: Recognizer, held_out: PreparedTrial, training: List[PreparedTrial]) -> TrialOutcome:
    model = recognizer.fit(training) if recognizer.trainable else None
    return recognizer.recognize(held_out, model)


def _prepared_subjects(dataset: Dataset, recognizer: Recognizer) -> Dict[str, List[PreparedTrial]]:
    return {s: [recognizer.prepare(r) for r in recs] for s, recs in dataset.by_subject().items()}


def check_class_coverage(dataset: Dataset, minimum: int = 2) -> None:
    """Chaque sujet doit avoir ``minimum`` essais par classe (couverture de tous les plis)"""
    for subject, recs in dataset.by_subject().items():
        counts = np.bincount([dataset.class_of(r) for r in recs], minlength=len(dataset.stimuli))
        short = [dataset.stimuli[c] for c in np.flatnonzero(counts < minimum)]
        if short:
            raise MissingClass(f"Sujet {subject}: moins de {minimum} essais pour {short} Hz")


def loo_cv(dataset: Dataset, cfg: MethodConfig, preprocess: Optional[PreprocessConfig] = None,
           n_jobs: int = 1, progress: bool = False) -> List[TrialOutcome]:
    """Chaque essai est testé avec un modèle entraîné sur les autres essais du même sujet"""
    if preprocess is not None:
        dataset = preprocess_dataset(dataset, preprocess)
    return _loo_preprocessed(dataset, cfg, preprocess, n_jobs, progress)


def _loo_preprocessed(dataset: Dataset, cfg: MethodConfig, preprocess: Optional[PreprocessConfig],
                      n_jobs: int = 1, progress: bool = False) -> List[TrialOutcome]:
    # ``preprocess`` ne sert ici qu'au choix des canaux : le jeu est déjà filtré
    if cfg.trainable:
        check_class_coverage(dataset)
    recognizer = make_recognizer(cfg, dataset.manifest, preprocess)

    folds = []
    for trials in _prepared_subjects(dataset, recognizer).values():
        folds.extend(loo_folds(trials))
    if not recognizer.trainable:
        logger.debug(f"Méthode {cfg.name} sans apprentissage : {len(folds)} essais évalués directement")

    tasks = tqdm(folds, desc=f"LOO {cfg.name}", disable=not progress)
    outcomes = Parallel(n_jobs=n_jobs)(
        delayed(_run_fold)(recognizer, held_out, training) for held_out, training in tasks
    )
    return sorted(outcomes, key=lambda o: (o.subject_id, o.trial_id))


def evaluate(dataset: Dataset, cfg: MethodConfig, preprocess: Optional[PreprocessConfig] = None,
             n_jobs: int = 1, progress: bool = False) -> Tuple[List[TrialOutcome], EvalReport]:
    outcomes = loo_cv(dataset, cfg, preprocess, n_jobs=n_jobs, progress=progress)
    return outcomes, build_report(outcomes, dataset.stimuli, cfg.hyperparameters())


def fit_subject_models(dataset: Dataset, cfg: MethodConfig,
                       preprocess: Optional[PreprocessConfig] = None) -> Dict[str, OvaModel]:
    """Un modèle par sujet, entraîné sur tous ses essais"""
    if not cfg.trainable:
        return {}
    if preprocess is not None:
        dataset = preprocess_dataset(dataset, preprocess)
    recognizer = make_recognizer(cfg, dataset.manifest, preprocess)
    return {s: recognizer.fit(trials) for s, trials in _prepared_subjects(dataset, recognizer).items()}


# ---------------------------------------------------------------------------
# Recherche sur grille
# ---------------------------------------------------------------------------

@dataclass
class GridSpec:
    """Axes nommés, chacun une liste finie de valeurs; objectif = ITR global"""
    axes: Dict[str, List[Any]]

    def __post_init__(self):
        if not self.axes:
            raise ConfigError("Grille vide")
        for name, values in self.axes.items():
            if name not in PARAMETER_PATHS:
                raise ConfigError(f"Axe de grille inconnu '{name}'")
            if not isinstance(values, list) or not values:
                raise ConfigError(f"L'axe '{name}' doit être une liste non vide")

    @property
    def size(self) -> int:
        return math.prod(len(v) for v in self.axes.values())

    def points(self) -> List[Dict[str, Any]]:
        names = list(self.axes)
        return [dict(zip(names, values)) for values in itertools.product(*self.axes.values())]

    @classmethod
    def from_dict(cls, data: Dict) -> Self:
        data = dict(data or {})
        objective = data.pop("objective", "itr")
        if objective != "itr":
            raise ConfigError(f"Seul l'objectif 'itr' est supporté, reçu '{objective}'")
        return cls(axes=dict(data.get("axes", data)))

    def to_dict(self) -> Dict:
        return {"objective": "itr", "axes": self.axes}


@dataclass
class GridResult:
    best_params: Dict[str, Any]
    best_itr: Optional[float]
    best_config: MethodConfig
    table: pd.DataFrame


def _grid_point_itr(dataset: Dataset, cfg: MethodConfig, preprocess: Optional[PreprocessConfig]) -> Dict[str, Any]:
    outcomes = _loo_preprocessed(dataset, cfg, preprocess)
    pooled = _summary_or_partial(outcomes, len(dataset.stimuli))
    return {
        "accuracy": pooled.accuracy,
        "mrt_s": pooled.mrt_s,
        "itr_bits_per_min": pooled.itr_bits_per_min,
    }


def _ranking_key(row: Dict[str, Any]) -> Tuple:
    """ITR décroissant, puis segment court, λ faible, ordre de la grille"""
    itr_value = row["itr_bits_per_min"]
    return (
        -(itr_value if itr_value is not None and not pd.isna(itr_value) else -math.inf),
        row["_cfg"].segment_length_s,
        row["_cfg"].train.lam,
        row["grid_index"],
    )


def grid_search(dataset: Dataset, grid: GridSpec, base: MethodConfig,
                preprocess: Optional[PreprocessConfig] = None, n_jobs: int = 1,
                progress: bool = False) -> GridResult:
    """Évaluation exhaustive de la grille sous LOO; table complète pour audit"""
    points = grid.points()
    logger.info(f"📊 Grille {base.name.upper()} : {grid.size} points ({', '.join(grid.axes)})")
    configs = [base.with_overrides(p) for p in points]
    if preprocess is not None:
        dataset = preprocess_dataset(dataset, preprocess)

    tasks = tqdm(configs, desc="Grille", disable=not progress)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_grid_point_itr)(dataset, cfg, preprocess) for cfg in tasks
    )

    rows = [
        {"grid_index": i, **point, **result, "_cfg": cfg}
        for i, (point, result, cfg) in enumerate(zip(points, results, configs))
    ]
    best = min(rows, key=_ranking_key)
    table = pd.DataFrame([{k: v for k, v in r.items() if k != "_cfg"} for r in rows])
    logger.info(f"✅ Meilleur point : {points[best['grid_index']]} (ITR {best['itr_bits_per_min']})")
    return GridResult(
        best_params=points[best["grid_index"]],
        best_itr=best["itr_bits_per_min"],
        best_config=best["_cfg"],
        table=table,
    )


def refine_per_class(dataset: Dataset, cfg: MethodConfig, factors: Sequence[float] = (0.5, 1.0, 2.0),
                     preprocess: Optional[PreprocessConfig] = None,
                     n_jobs: int = 1) -> Tuple[MethodConfig, Optional[float]]:
    """Affinage coordonnée par coordonnée des multiplicateurs de gain puis de largeur par classe"""
    if cfg.name != "bifb" or cfg.filter_init != "shaped":
        raise ConfigError("L'affinage par classe ne s'applique qu'au BIFB initialisé par profil")
    if preprocess is not None:
        dataset = preprocess_dataset(dataset, preprocess)

    k = len(dataset.stimuli)
    current = replace(cfg, gain_factors=list(cfg.gain_factors or [1.0] * k),
                      bandwidth_factors=list(cfg.bandwidth_factors or [1.0] * k))

    def score(candidate: MethodConfig) -> float:
        value = _grid_point_itr(dataset, candidate, preprocess)["itr_bits_per_min"]
        return -math.inf if value is None else value

    best_score = score(current)
    for attribute in ("gain_factors", "bandwidth_factors"):
        for c in range(k):
            candidates = []
            for factor in factors:
                values = list(getattr(current, attribute))
                values[c] = values[c] * factor
                candidates.append(replace(current, **{attribute: values}))
            scores = Parallel(n_jobs=n_jobs)(delayed(score)(cand) for cand in candidates)
            for cand, value in zip(candidates, scores):
                # amélioration stricte seulement : à égalité on garde l'existant
                if value > best_score:
                    current, best_score = cand, value
            logger.debug(f"🔄 {attribute}[{c}] → {getattr(current, attribute)[c]} (ITR {best_score})")

    return current, (None if best_score == -math.inf else best_score)


# ---------------------------------------------------------------------------
# Statistiques
# ---------------------------------------------------------------------------

def paired_ttest(a: Sequence[float], b: Sequence[float]) -> Tuple[float, float]:
    """Test t apparié bilatéral (ddl = n − 1), p via la fonction bêta incomplète régularisée"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"Longueurs différentes: {a.shape[0]} vs {b.shape[0]}")
    n = a.shape[0]
    if n < 2:
        raise LengthMismatch(f"Au moins 2 paires requises, reçu {n}")

    d = a - b
    sd = d.std(ddof=1)
    if sd == 0.0:
        raise ZeroVariance("Toutes les différences sont égales : statistique t indéfinie")

    t = float(d.mean() / (sd / math.sqrt(n)))
    df = n - 1
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return t, min(1.0, p)
