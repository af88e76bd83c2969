"""
Chaîne de reconnaissance complète d'un essai :
pré-traitement → segmentation → PSD → caractéristiques / reconnaisseur → vote t-sur-T.

Chaque méthode est une classe ``*Recognizer`` :
- ``prepare(rec)`` calcule tout ce qui ne dépend pas de l'apprentissage
- ``fit(trials)`` entraîne (méthodes à filtres seulement) et renvoie le modèle
- ``recognize(trial, model)`` produit le ``TrialOutcome``
"""

import logging
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from typing_extensions import Self

from .baselines import cca_recognize, psda_recognize, psda_peak_recognize
from .classify import DecisionRule, OvaModel, TrainConfig, decide, train_ova
from .data_model import DatasetManifest, PreprocessConfig, Recording
from .dsp import Segment, psd, segment_stream
from .errors import ConfigError, NyquistViolation, UnknownChannel
from .filterbank import FilterBank, build_bifb, build_uf, feature_matrix, shaped_bifb
from .synth import DEFAULT_PROFILE, ResponseProfile

logger = logging.getLogger(__name__)

METHODS = ("bifb", "uf", "psda", "psda_peak", "cca")
TRAINABLE_METHODS = ("bifb", "uf")

# Axes de grille et paramètres surchargeables → (section, champ)
PARAMETER_PATHS = {
    "segment_length_s": (None, "segment_length_s"),
    "overlap": (None, "overlap"),
    "zero_pad_factor": (None, "zero_pad_factor"),
    "gamma": (None, "gamma"),
    "beta": (None, "beta"),
    "base_bandwidth_hz": (None, "base_bandwidth_hz"),
    "half_width_hz": (None, "half_width_hz"),
    "n_harmonics": (None, "n_harmonics"),
    "lam": ("train", "lam"),
    "lambda": ("train", "lam"),
    "learning_rate": ("train", "learning_rate"),
    "t_required": ("decision", "t_required"),
    "window_T": ("decision", "window_T"),
}


@dataclass
class MethodConfig:
    """Paramètres d'une méthode de reconnaissance"""
    name: str = "bifb"
    segment_length_s: float = 2.0
    overlap: float = 0.5
    zero_pad_factor: int = 1
    decision: DecisionRule = field(default_factory=DecisionRule)
    train: TrainConfig = field(default_factory=TrainConfig)

    # BIFB : "shaped" (profil inverse) ou "explicit" (2K gains et 2K largeurs)
    filter_init: str = "shaped"
    gamma: float = 1.0
    beta: float = 1.0
    base_bandwidth_hz: float = 2.0
    gain_factors: Optional[List[float]] = None
    bandwidth_factors: Optional[List[float]] = None
    gains: Optional[List[float]] = None
    bandwidths: Optional[List[float]] = None
    profile: Optional[List[List[float]]] = None

    # UF / PSDA : demi-largeur BW_D
    half_width_hz: float = 1.0

    # CCA
    n_harmonics: int = 2
    cca_channels: Optional[List[str]] = None

    def validate(self) -> None:
        try:
            self._check()
        except TypeError as e:
            raise ConfigError(f"Section method mal typée: {e}")

    def _check(self) -> None:
        if self.name not in METHODS:
            raise ConfigError(f"Méthode inconnue '{self.name}' (disponibles: {', '.join(METHODS)})")
        if self.segment_length_s <= 0:
            raise ConfigError(f"segment_length_s doit être > 0, reçu {self.segment_length_s}")
        if not (0.0 <= self.overlap < 1.0):
            raise ConfigError(f"overlap doit être dans [0, 1), reçu {self.overlap}")
        if self.zero_pad_factor < 1:
            raise ConfigError("zero_pad_factor doit être ≥ 1")
        if self.name in ("uf", "psda") and self.half_width_hz <= 0:
            raise ConfigError(f"half_width_hz doit être > 0, reçu {self.half_width_hz}")
        if self.name == "cca" and self.n_harmonics < 1:
            raise ConfigError(f"n_harmonics doit être ≥ 1, reçu {self.n_harmonics}")
        if self.name == "bifb":
            if self.filter_init not in ("shaped", "explicit"):
                raise ConfigError(f"filter_init inconnu '{self.filter_init}'")
            if self.filter_init == "explicit" and (self.gains is None or self.bandwidths is None):
                raise ConfigError("BIFB explicite: 'gains' et 'bandwidths' requis")

    @property
    def trainable(self) -> bool:
        return self.name in TRAINABLE_METHODS

    @property
    def response_profile(self) -> ResponseProfile:
        if self.profile is None:
            return DEFAULT_PROFILE
        return ResponseProfile(control_points=tuple((float(f), float(a)) for f, a in self.profile))

    def build_bank(self, stimuli: Sequence[float], sampling_rate_hz: float) -> FilterBank:
        """Banc de filtres de la méthode (bifb ou uf)"""
        try:
            if self.name == "uf":
                return build_uf(stimuli, self.half_width_hz, sampling_rate_hz)
            if self.filter_init == "explicit":
                return build_bifb(stimuli, self.gains, self.bandwidths, sampling_rate_hz)
            return shaped_bifb(
                stimuli, self.response_profile, gamma=self.gamma, beta=self.beta,
                base_bandwidth_hz=self.base_bandwidth_hz, sampling_rate_hz=sampling_rate_hz,
                gain_factors=self.gain_factors, bandwidth_factors=self.bandwidth_factors,
            )
        except NyquistViolation as e:
            # causé par les paramètres de la méthode, pas par les données
            raise ConfigError(str(e)) from e

    def hyperparameters(self) -> Dict[str, Any]:
        """Paramètres effectivement utilisés par la méthode (pour les rapports)"""
        params: Dict[str, Any] = {
            "segment_length_s": self.segment_length_s,
            "overlap": self.overlap,
            "t_required": self.decision.t_required,
            "window_T": self.decision.window_T,
        }
        if self.name == "bifb":
            if self.filter_init == "explicit":
                params.update(gains=self.gains, bandwidths=self.bandwidths)
            else:
                params.update(gamma=self.gamma, beta=self.beta, base_bandwidth_hz=self.base_bandwidth_hz)
                if self.gain_factors is not None:
                    params["gain_factors"] = self.gain_factors
                if self.bandwidth_factors is not None:
                    params["bandwidth_factors"] = self.bandwidth_factors
        if self.name in ("uf", "psda"):
            params["half_width_hz"] = self.half_width_hz
        if self.name == "cca":
            params["n_harmonics"] = self.n_harmonics
        if self.trainable:
            params.update(lam=self.train.lam, learning_rate=self.train.learning_rate)
        return params

    def with_overrides(self, params: Dict[str, Any]) -> Self:
        """Copie avec des paramètres plats (axes de grille) remplacés"""
        cfg = replace(self)
        for key, value in params.items():
            if key not in PARAMETER_PATHS:
                raise ConfigError(f"Paramètre inconnu '{key}' (disponibles: {', '.join(sorted(PARAMETER_PATHS))})")
            section, name = PARAMETER_PATHS[key]
            if section is None:
                setattr(cfg, name, value)
                continue
            try:
                setattr(cfg, section, replace(getattr(cfg, section), **{name: value}))
            except TypeError as e:
                raise ConfigError(f"Paramètre '{key}' mal typé: {e}")
        cfg.validate()
        return cfg

    @classmethod
    def from_dict(cls, data: Dict) -> Self:
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Champs de méthode inconnus: {', '.join(sorted(unknown))}")
        try:
            if "decision" in data:
                data["decision"] = DecisionRule(**data["decision"])
            if "train" in data:
                data["train"] = TrainConfig.from_dict(data["train"])
            cfg = cls(**data)
        except TypeError as e:
            raise ConfigError(f"Section method invalide: {e}")
        cfg.validate()
        return cfg

    def to_dict(self) -> Dict:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["decision"] = {"t_required": self.decision.t_required, "window_T": self.decision.window_T}
        data["train"] = self.train.to_dict()
        return data


@dataclass(frozen=True)
class TrialOutcome:
    trial_id: str
    subject_id: str
    true_class: int
    recognized_class: Optional[int]
    recognition_time_s: Optional[float]
    method: str

    def __post_init__(self):
        if (self.recognized_class is None) != (self.recognition_time_s is None):
            raise ValueError(f"Essai {self.trial_id}: classe et temps de reconnaissance vont de pair")

    @property
    def decided(self) -> bool:
        return self.recognized_class is not None

    @property
    def correct(self) -> bool:
        return self.recognized_class == self.true_class

    def to_dict(self) -> Dict:
        return {
            "trial_id": self.trial_id,
            "subject_id": self.subject_id,
            "method": self.method,
            "true_class": self.true_class,
            "recognized_class": self.recognized_class,
            "recognition_time_s": self.recognition_time_s,
        }


@dataclass(frozen=True, eq=False)
class PreparedTrial:
    """Essai découpé : caractéristiques (méthodes à filtres) ou candidats (sans apprentissage)"""
    trial_id: str
    subject_id: str
    true_class: int
    end_times_s: Tuple[float, ...]
    features: Optional[np.ndarray] = None
    candidates: Optional[Tuple[int, ...]] = None


class Recognizer:
    """Base commune : segmentation du canal d'analyse et vote t-sur-T"""

    trainable = False

    def __init__(self, cfg: MethodConfig, manifest: DatasetManifest,
                 preprocess: Optional[PreprocessConfig] = None):
        cfg.validate()
        self.cfg = cfg
        self.manifest = manifest
        self.stimuli = manifest.stimulus_frequencies_hz
        self.sampling_rate_hz = manifest.sampling_rate_hz
        self.preprocess = preprocess or PreprocessConfig()

    def segments(self, rec: Recording) -> List[Segment]:
        return segment_stream(rec.channel(self.preprocess.analysis_channel), self.cfg.segment_length_s,
                              self.cfg.overlap, rec.sampling_rate_hz)

    def prepare(self, rec: Recording) -> PreparedTrial:
        raise NotImplementedError

    def fit(self, trials: Sequence[PreparedTrial]) -> Optional[OvaModel]:
        return None

    def candidates(self, trial: PreparedTrial, model: Optional[OvaModel] = None) -> List[int]:
        return list(trial.candidates)

    def recognize(self, trial: PreparedTrial, model: Optional[OvaModel] = None) -> TrialOutcome:
        decision = decide(self.candidates(trial, model), self.cfg.decision)
        recognized, time_s = (None, None) if decision is None else (decision[0], trial.end_times_s[decision[1]])
        return TrialOutcome(
            trial_id=trial.trial_id,
            subject_id=trial.subject_id,
            true_class=trial.true_class,
            recognized_class=recognized,
            recognition_time_s=time_s,
            method=self.cfg.name,
        )

    def _trial(self, rec: Recording, segments: Sequence[Segment], **kwargs) -> PreparedTrial:
        return PreparedTrial(
            trial_id=rec.trial_id,
            subject_id=rec.subject_id,
            true_class=self.manifest.class_index(rec.stimulus_freq_hz),
            end_times_s=tuple(s.end_time_s for s in segments),
            **kwargs,
        )


class FilterBankRecognizer(Recognizer):
    """BIFB et UF : caractéristiques du banc + régression logistique un-contre-tous"""

    trainable = True

    def __init__(self, cfg: MethodConfig, manifest: DatasetManifest,
                 preprocess: Optional[PreprocessConfig] = None):
        super().__init__(cfg, manifest, preprocess)
        self.bank = cfg.build_bank(self.stimuli, self.sampling_rate_hz)

    def features(self, segments: Sequence[Segment]) -> np.ndarray:
        spectra = [psd(s, self.cfg.zero_pad_factor) for s in segments]
        # même grille pour tous les segments : une seule matrice de réponses
        responses = feature_matrix(spectra[0], self.bank)
        return np.vstack([sp.power for sp in spectra]) @ responses.T

    def prepare(self, rec: Recording) -> PreparedTrial:
        segments = self.segments(rec)
        return self._trial(rec, segments, features=self.features(segments))

    def fit(self, trials: Sequence[PreparedTrial]) -> OvaModel:
        X = np.vstack([t.features for t in trials])
        labels = np.concatenate([np.full(t.features.shape[0], t.true_class) for t in trials])
        return train_ova(X, labels, self.stimuli, self.cfg.train, feature_weights=self.bank.feature_weights)

    def candidates(self, trial: PreparedTrial, model: Optional[OvaModel] = None) -> List[int]:
        if model is None:
            raise ConfigError(f"Méthode {self.cfg.name}: modèle requis pour la reconnaissance")
        return [int(c) for c in np.argmax(model.scores(trial.features), axis=1)]


class PsdaRecognizer(Recognizer):
    """PSDA harmonique (psda) ou par pic spectral (psda_peak)"""

    def prepare(self, rec: Recording) -> PreparedTrial:
        segments = self.segments(rec)
        spectra = [psd(s, self.cfg.zero_pad_factor) for s in segments]
        if self.cfg.name == "psda_peak":
            candidates = [psda_peak_recognize(sp, self.stimuli) for sp in spectra]
        else:
            candidates = [psda_recognize(sp, self.stimuli, self.cfg.half_width_hz) for sp in spectra]
        return self._trial(rec, segments, candidates=tuple(candidates))


class CcaRecognizer(Recognizer):
    """CCA multicanal contre les références sinus/cosinus"""

    def __init__(self, cfg: MethodConfig, manifest: DatasetManifest,
                 preprocess: Optional[PreprocessConfig] = None):
        super().__init__(cfg, manifest, preprocess)
        highest = cfg.n_harmonics * max(self.stimuli)
        if highest >= self.sampling_rate_hz / 2.0:
            raise ConfigError(
                f"CCA: harmonique {cfg.n_harmonics} de {max(self.stimuli)} Hz au-delà de Nyquist "
                f"({self.sampling_rate_hz / 2.0} Hz)"
            )

    def channels(self) -> List[str]:
        if self.cfg.cca_channels is not None:
            unknown = [c for c in self.cfg.cca_channels if c not in self.manifest.channel_names]
            if unknown:
                raise UnknownChannel(f"Canaux CCA inconnus: {', '.join(unknown)}")
            return list(self.cfg.cca_channels)
        # le canal de référence est nul après re-référencement
        return [c for c in self.manifest.channel_names if c != self.preprocess.reference_channel]

    def prepare(self, rec: Recording) -> PreparedTrial:
        rows = [rec.channel_index(c) for c in self.channels()]
        segments = segment_stream(rec.samples[rows], self.cfg.segment_length_s, self.cfg.overlap,
                                  rec.sampling_rate_hz)
        candidates = [
            cca_recognize(s.samples, self.stimuli, self.cfg.n_harmonics, rec.sampling_rate_hz)
            for s in segments
        ]
        return self._trial(rec, segments, candidates=tuple(candidates))


RECOGNIZERS = {
    "bifb": FilterBankRecognizer,
    "uf": FilterBankRecognizer,
    "psda": PsdaRecognizer,
    "psda_peak": PsdaRecognizer,
    "cca": CcaRecognizer,
}


def make_recognizer(cfg: MethodConfig, manifest: DatasetManifest,
                    preprocess: Optional[PreprocessConfig] = None) -> Recognizer:
    cfg.validate()
    return RECOGNIZERS[cfg.name](cfg, manifest, preprocess)
