"""
Régression logistique régularisée un-contre-tous et règle de décision t-sur-T.

- hθ(X̃) = g(θᵀX̃), X̃ = [1, x_1, …, x_2K]
- J(θ) = entropie croisée moyenne + (λ/2M)·Σ_{j≥1} θ_j² (biais non pénalisé)
- descente de gradient à pas fixe depuis θ = 0, arrêt sur la baisse du coût
"""

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit
from typing_extensions import Self

from .errors import (
    DataIOError, DimensionMismatch, InvalidDecisionRule, MissingClass,
    MissingFile, NonPositiveParameter,
)

logger = logging.getLogger(__name__)


def sigmoid(z):
    """1/(1+e^(−z)), stable pour tout z"""
    return expit(z)


def augment(X: np.ndarray) -> np.ndarray:
    """Ajoute la colonne de biais : (M × n) → (M × n+1)"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.hstack([np.ones((X.shape[0], 1)), X])


def _penalty_mask(theta: np.ndarray) -> np.ndarray:
    mask = np.ones_like(theta)
    mask[0] = 0.0
    return mask


def cost(theta: np.ndarray, X_aug: np.ndarray, y: np.ndarray, lam: float) -> float:
    """Coût régularisé sur des données déjà augmentées du biais"""
    theta = np.asarray(theta, dtype=float)
    y = np.asarray(y, dtype=float)
    m = X_aug.shape[0]
    z = X_aug @ theta
    # −[y·log h + (1−y)·log(1−h)] = log(1+e^z) − y·z
    data_term = np.mean(np.logaddexp(0.0, z) - y * z)
    penalty = lam / (2.0 * m) * np.sum(theta[1:] ** 2)
    return float(data_term + penalty)


def gradient(theta: np.ndarray, X_aug: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    m = X_aug.shape[0]
    h = sigmoid(X_aug @ theta)
    return X_aug.T @ (h - np.asarray(y, dtype=float)) / m + (lam / m) * theta * _penalty_mask(theta)


@dataclass
class TrainConfig:
    learning_rate: float = 0.5
    max_iterations: int = 5000
    convergence_tol: float = 1e-9
    lam: float = 0.1
    feature_standardization: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0 or self.max_iterations <= 0 or self.convergence_tol <= 0:
            raise NonPositiveParameter("learning_rate, max_iterations et convergence_tol doivent être > 0")
        if self.lam < 0:
            raise NonPositiveParameter(f"lambda doit être ≥ 0, reçu {self.lam}")

    @classmethod
    def from_dict(cls, data: Dict) -> Self:
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        return cls(**data)

    def to_dict(self) -> Dict:
        return {
            "learning_rate": self.learning_rate,
            "max_iterations": self.max_iterations,
            "convergence_tol": self.convergence_tol,
            "lambda": self.lam,
            "feature_standardization": self.feature_standardization,
        }


@dataclass(eq=False)
class OvaModel:
    thetas: np.ndarray
    lam: float
    class_frequencies_hz: Tuple[float, ...]
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    converged: List[bool] = field(default_factory=list)

    def __post_init__(self):
        self.thetas = np.asarray(self.thetas, dtype=float)
        self.feature_mean = np.asarray(self.feature_mean, dtype=float)
        self.feature_scale = np.asarray(self.feature_scale, dtype=float)
        self.class_frequencies_hz = tuple(float(f) for f in self.class_frequencies_hz)
        if self.thetas.ndim != 2 or self.thetas.shape[0] != len(self.class_frequencies_hz):
            raise DimensionMismatch(
                f"{len(self.class_frequencies_hz)} vecteurs θ attendus, forme reçue {self.thetas.shape}"
            )
        if not np.all(np.isfinite(self.thetas)):
            raise DimensionMismatch("Poids non finis dans le modèle")
        if not self.converged:
            self.converged = [True] * self.n_classes

    @property
    def n_classes(self) -> int:
        return self.thetas.shape[0]

    @property
    def n_features(self) -> int:
        return self.thetas.shape[1] - 1

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.feature_mean) / self.feature_scale

    def scores(self, X: np.ndarray) -> np.ndarray:
        """θ_kᵀX̃ pour chaque classe : (M × K)"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"{self.n_features} caractéristiques attendues, reçu {X.shape[1]}")
        return augment(self.standardize(X)) @ self.thetas.T

    def to_dict(self) -> Dict:
        # json écrit les float via repr : aller-retour exact
        return {
            "class_frequencies_hz": list(self.class_frequencies_hz),
            "lambda": self.lam,
            "thetas": self.thetas.tolist(),
            "feature_mean": self.feature_mean.tolist(),
            "feature_scale": self.feature_scale.tolist(),
            "converged": list(self.converged),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> Self:
        return cls(
            thetas=np.array(data["thetas"], dtype=float),
            lam=float(data["lambda"]),
            class_frequencies_hz=tuple(data["class_frequencies_hz"]),
            feature_mean=np.array(data["feature_mean"], dtype=float),
            feature_scale=np.array(data["feature_scale"], dtype=float),
            converged=list(data.get("converged", [])),
        )

    def save(self, path: Path) -> Path:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)
                f.write("\n")
        except OSError as e:
            raise DataIOError(f"Écriture du modèle impossible ({path}): {e}")
        return path

    @classmethod
    def load(cls, path: Path) -> Self:
        path = Path(path)
        if not path.exists():
            raise MissingFile(f"Modèle introuvable: {path}")
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_dict(json.load(f))


def gradient_descent(X_aug: np.ndarray, y: np.ndarray, cfg: TrainConfig) -> Tuple[np.ndarray, float, bool]:
    """Minimise J depuis θ = 0; renvoie (meilleur θ, coût, convergé)"""
    theta = np.zeros(X_aug.shape[1])
    current = cost(theta, X_aug, y, cfg.lam)
    best_theta, best_cost = theta, current

    for _ in range(cfg.max_iterations):
        theta = theta - cfg.learning_rate * gradient(theta, X_aug, y, cfg.lam)
        new_cost = cost(theta, X_aug, y, cfg.lam)
        if new_cost < best_cost:
            best_theta, best_cost = theta, new_cost
        if 0.0 <= current - new_cost < cfg.convergence_tol:
            return best_theta, best_cost, True
        current = new_cost
    return best_theta, best_cost, False


def train_ova(X: np.ndarray, labels: Sequence[int], class_frequencies_hz: Sequence[float],
              cfg: TrainConfig, feature_weights: Optional[Sequence[float]] = None) -> OvaModel:
    """K problèmes binaires (classe k contre le reste)

    ``feature_weights`` (un poids > 0 par caractéristique) est réappliqué après le
    z-score : X̃_j = w_j·(x_j − μ_j)/σ_j. Sans lui, le z-score annule tout gain de
    filtre. Ignoré quand la standardisation est désactivée (les gains sont déjà
    dans les caractéristiques brutes).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    labels = np.asarray(labels, dtype=int)
    k = len(class_frequencies_hz)
    if X.shape[0] != labels.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} exemples pour {labels.shape[0]} étiquettes")

    missing = [c for c in range(k) if not np.any(labels == c)]
    if missing:
        raise MissingClass(f"Classes absentes de l'entraînement: {[class_frequencies_hz[c] for c in missing]} Hz")

    if cfg.feature_standardization:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        if feature_weights is not None:
            weights = np.asarray(feature_weights, dtype=float)
            if weights.shape != (X.shape[1],):
                raise DimensionMismatch(f"{X.shape[1]} poids attendus, reçu {weights.shape}")
            if not np.all(weights > 0):
                raise NonPositiveParameter("Les poids de caractéristiques doivent être > 0")
            scale = scale / weights
    else:
        mean = np.zeros(X.shape[1])
        scale = np.ones(X.shape[1])

    X_aug = augment((X - mean) / scale)
    thetas, converged = [], []
    for c in range(k):
        theta, final_cost, ok = gradient_descent(X_aug, (labels == c).astype(float), cfg)
        if not ok:
            logger.warning(
                f"⚠️ Pas de convergence pour {class_frequencies_hz[c]} Hz après {cfg.max_iterations} itérations "
                f"(coût {final_cost:.6f})"
            )
        thetas.append(theta)
        converged.append(ok)

    return OvaModel(
        thetas=np.vstack(thetas),
        lam=cfg.lam,
        class_frequencies_hz=tuple(class_frequencies_hz),
        feature_mean=mean,
        feature_scale=scale,
        converged=converged,
    )


def predict_candidate(model: OvaModel, x) -> Tuple[int, np.ndarray]:
    """Classe candidate f_c = argmax_k hθ^k(X̃) (égalité → plus petit indice)"""
    x = getattr(x, "x", x)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("predict_candidate attend un seul vecteur")
    scores = model.scores(x)[0]
    # argmax sur θᵀX̃ : la sigmoïde sature à 1.0 pour les grands scores
    return int(np.argmax(scores)), sigmoid(scores)


@dataclass(frozen=True)
class DecisionRule:
    t_required: int = 3
    window_T: int = 4

    def __post_init__(self):
        if self.t_required < 1 or self.window_T < 1:
            raise InvalidDecisionRule("t et T doivent être ≥ 1")
        if self.t_required > self.window_T:
            raise InvalidDecisionRule(f"t ({self.t_required}) > T ({self.window_T})")


def decide(candidates: Sequence[int], rule: DecisionRule) -> Optional[Tuple[int, int]]:
    """Première position i où une classe apparaît ≥ t fois dans les T derniers candidats

    La fenêtre est tronquée en début de flux. Renvoie (classe, i) ou None.
    """
    window: Counter = Counter()
    for i, candidate in enumerate(candidates):
        window[candidate] += 1
        if i >= rule.window_T:
            window[candidates[i - rule.window_T]] -= 1
        # seul le candidat entrant peut atteindre le seuil
        if window[candidate] >= rule.t_required:
            return candidate, i
    return None
