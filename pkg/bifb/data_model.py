#!/usr/bin/env python3
"""
Représentation canonique des jeux de données SSVEP
- Manifest JSON + un CSV par essai (en-tête = noms des canaux, une ligne par échantillon)
- Validation à l'ingestion
- Pré-traitement : re-référencement, notch, passe-bande Butterworth à phase nulle
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import signal
from typing_extensions import Self

from .errors import (
    BandEdgesAboveNyquist,
    ChannelMismatch,
    ConfigError,
    DataIOError,
    InvalidRecording,
    LabelNotInStimulusSet,
    MalformedManifest,
    MissingFile,
    SignalTooShort,
    UnknownChannel,
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
TRIALS_DIRNAME = "trials"
FREQ_TOLERANCE_HZ = 1e-9


def _same_frequency(a: float, b: float) -> bool:
    return abs(a - b) <= FREQ_TOLERANCE_HZ


@dataclass(frozen=True, eq=False)
class Recording:
    """Un essai EEG multicanal (canaux × temps, en microvolts)"""
    samples: np.ndarray
    sampling_rate_hz: float
    channel_names: Tuple[str, ...]
    stimulus_freq_hz: float
    subject_id: str
    trial_id: str
    seed: Optional[int] = None

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 2:
            raise InvalidRecording(f"Essai {self.trial_id}: échantillons 2-D attendus, reçu {samples.ndim}-D")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "channel_names", tuple(self.channel_names))

        if samples.shape[0] != len(self.channel_names):
            raise ChannelMismatch(
                f"Essai {self.trial_id}: {samples.shape[0]} lignes pour {len(self.channel_names)} canaux"
            )
        if self.sampling_rate_hz <= 0:
            raise InvalidRecording(f"Essai {self.trial_id}: fréquence d'échantillonnage non positive")
        if self.stimulus_freq_hz <= 0:
            raise InvalidRecording(f"Essai {self.trial_id}: fréquence de stimulus non positive")
        # La seconde harmonique doit rester sous Nyquist
        if self.sampling_rate_hz < 4.0 * self.stimulus_freq_hz:
            raise InvalidRecording(
                f"Essai {self.trial_id}: {self.sampling_rate_hz} Hz trop faible pour 2 × {self.stimulus_freq_hz} Hz"
            )

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sampling_rate_hz

    @property
    def nyquist_hz(self) -> float:
        return self.sampling_rate_hz / 2.0

    def channel_index(self, name: str) -> int:
        try:
            return self.channel_names.index(name)
        except ValueError:
            raise UnknownChannel(f"Canal inconnu '{name}' (disponibles: {', '.join(self.channel_names)})")

    def channel(self, name: str) -> np.ndarray:
        return self.samples[self.channel_index(name)]

    def with_samples(self, samples: np.ndarray) -> "Recording":
        return replace(self, samples=samples)


@dataclass(frozen=True)
class TrialEntry:
    """Une ligne du manifest"""
    trial_id: str
    subject_id: str
    stimulus_freq_hz: float
    file: str
    seed: Optional[int] = None

    def to_dict(self) -> Dict:
        data = {
            "trial_id": self.trial_id,
            "subject_id": self.subject_id,
            "stimulus_freq_hz": self.stimulus_freq_hz,
            "file": self.file,
        }
        if self.seed is not None:
            data["seed"] = self.seed
        return data


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    stimulus_frequencies_hz: Tuple[float, ...]
    sampling_rate_hz: float
    channel_names: Tuple[str, ...]
    trials: Tuple[TrialEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "stimulus_frequencies_hz", tuple(float(f) for f in self.stimulus_frequencies_hz))
        object.__setattr__(self, "channel_names", tuple(self.channel_names))
        object.__setattr__(self, "trials", tuple(self.trials))

        stimuli = self.stimulus_frequencies_hz
        if len(stimuli) < 2:
            raise MalformedManifest(f"Au moins 2 stimuli requis, reçu {len(stimuli)}")
        if any(f <= 0 for f in stimuli):
            raise MalformedManifest("Fréquences de stimulation non positives")
        if any(b <= a for a, b in zip(stimuli, stimuli[1:])):
            raise MalformedManifest("Les fréquences de stimulation doivent être strictement croissantes")
        if self.sampling_rate_hz <= 0:
            raise MalformedManifest("Fréquence d'échantillonnage non positive")
        if self.sampling_rate_hz < 4.0 * max(stimuli):
            raise MalformedManifest(
                f"{self.sampling_rate_hz} Hz ne laisse pas la seconde harmonique de {max(stimuli)} Hz sous Nyquist"
            )
        if not self.channel_names:
            raise MalformedManifest("Liste de canaux vide")
        if not self.trials:
            raise MalformedManifest("Liste d'essais vide")

        seen = set()
        for trial in self.trials:
            if trial.trial_id in seen:
                raise MalformedManifest(f"Identifiant d'essai dupliqué: {trial.trial_id}")
            seen.add(trial.trial_id)
            self.class_index(trial.stimulus_freq_hz)

    @property
    def n_classes(self) -> int:
        return len(self.stimulus_frequencies_hz)

    def class_index(self, freq_hz: float) -> int:
        """Index de classe d'une fréquence (doit appartenir à l'ensemble des stimuli)"""
        for k, f in enumerate(self.stimulus_frequencies_hz):
            if _same_frequency(f, freq_hz):
                return k
        raise LabelNotInStimulusSet(
            f"{freq_hz} Hz n'appartient pas à l'ensemble des stimuli {list(self.stimulus_frequencies_hz)}"
        )

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "stimulus_frequencies_hz": list(self.stimulus_frequencies_hz),
            "sampling_rate_hz": self.sampling_rate_hz,
            "channel_names": list(self.channel_names),
            "trials": [t.to_dict() for t in self.trials],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> Self:
        try:
            trials = [
                TrialEntry(
                    trial_id=str(t["trial_id"]),
                    subject_id=str(t["subject_id"]),
                    stimulus_freq_hz=float(t["stimulus_freq_hz"]),
                    file=str(t["file"]),
                    seed=t.get("seed"),
                )
                for t in data["trials"]
            ]
            return cls(
                name=str(data["name"]),
                stimulus_frequencies_hz=tuple(float(f) for f in data["stimulus_frequencies_hz"]),
                sampling_rate_hz=float(data["sampling_rate_hz"]),
                channel_names=tuple(str(c) for c in data["channel_names"]),
                trials=tuple(trials),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise MalformedManifest(f"Manifest invalide: {e}")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Manifest + tous les essais chargés"""
    manifest: DatasetManifest
    recordings: Tuple[Recording, ...] = field(default_factory=tuple)

    @property
    def stimuli(self) -> Tuple[float, ...]:
        return self.manifest.stimulus_frequencies_hz

    @property
    def subjects(self) -> List[str]:
        return sorted({r.subject_id for r in self.recordings})

    def by_subject(self) -> Dict[str, List[Recording]]:
        """Essais groupés par sujet, triés par identifiant (l'ordre du manifest n'importe pas)"""
        groups: Dict[str, List[Recording]] = {}
        for rec in self.recordings:
            groups.setdefault(rec.subject_id, []).append(rec)
        return {s: sorted(groups[s], key=lambda r: r.trial_id) for s in sorted(groups)}

    def class_of(self, rec: Recording) -> int:
        return self.manifest.class_index(rec.stimulus_freq_hz)


# ---------------------------------------------------------------------------
# Lecture / écriture
# ---------------------------------------------------------------------------

def _read_trial_csv(path: Path, channel_names: Sequence[str]) -> np.ndarray:
    if not path.exists():
        raise MissingFile(f"Fichier d'essai introuvable: {path}")
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise MalformedManifest(f"CSV illisible {path.name}: {e}")

    header = [str(c) for c in frame.columns]
    if header != list(channel_names):
        raise ChannelMismatch(f"{path.name}: en-tête {header} ≠ canaux du manifest {list(channel_names)}")
    try:
        values = frame.to_numpy(dtype=float)
    except ValueError as e:
        raise MalformedManifest(f"Valeurs non numériques dans {path.name}: {e}")
    if values.size == 0 or np.isnan(values).any():
        raise MalformedManifest(f"Échantillons vides ou manquants dans {path.name}")
    return np.ascontiguousarray(values.T)


def load_dataset(manifest_path) -> Dataset:
    """Charge un manifest et tous les essais qu'il référence"""
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / MANIFEST_NAME
    if not manifest_path.exists():
        raise MissingFile(f"Manifest introuvable: {manifest_path}")

    try:
        with open(manifest_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise MalformedManifest(f"JSON invalide dans {manifest_path}: {e}")
    if not isinstance(data, dict):
        raise MalformedManifest(f"{manifest_path}: objet JSON attendu")

    manifest = DatasetManifest.from_dict(data)
    base_dir = manifest_path.parent

    recordings = []
    for trial in manifest.trials:
        samples = _read_trial_csv(base_dir / trial.file, manifest.channel_names)
        recordings.append(Recording(
            samples=samples,
            sampling_rate_hz=manifest.sampling_rate_hz,
            channel_names=manifest.channel_names,
            stimulus_freq_hz=trial.stimulus_freq_hz,
            subject_id=trial.subject_id,
            trial_id=trial.trial_id,
            seed=trial.seed,
        ))

    logger.info(f"📚 {len(recordings)} essais chargés depuis {manifest_path} "
                f"({len({r.subject_id for r in recordings})} sujets, K={manifest.n_classes})")
    return Dataset(manifest=manifest, recordings=tuple(recordings))


def _format_sample(value: float) -> str:
    # Notation décimale fixe, la plus courte qui relit exactement le même float
    return np.format_float_positional(value, unique=True, trim='0')


def save_dataset(dataset: Dataset, out_dir) -> Path:
    """Écrit le manifest et un CSV par essai; retourne le chemin du manifest"""
    out_dir = Path(out_dir)
    trials_dir = out_dir / TRIALS_DIRNAME
    try:
        trials_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DataIOError(f"Impossible de créer {trials_dir}: {e}")

    formatter = np.vectorize(_format_sample, otypes=[str])
    entries = []
    for rec in dataset.recordings:
        rel_path = f"{TRIALS_DIRNAME}/{rec.trial_id}.csv"
        frame = pd.DataFrame(formatter(rec.samples.T), columns=list(rec.channel_names))
        try:
            frame.to_csv(out_dir / rel_path, index=False, lineterminator="\n")
        except OSError as e:
            raise DataIOError(f"Écriture impossible de {rel_path}: {e}")
        entries.append(TrialEntry(
            trial_id=rec.trial_id,
            subject_id=rec.subject_id,
            stimulus_freq_hz=rec.stimulus_freq_hz,
            file=rel_path,
            seed=rec.seed,
        ))

    manifest = replace(dataset.manifest, trials=tuple(entries))
    manifest_path = out_dir / MANIFEST_NAME
    try:
        with open(manifest_path, 'w', encoding='utf-8') as f:
            json.dump(manifest.to_dict(), f, indent=2, ensure_ascii=False)
            f.write("\n")
    except OSError as e:
        raise DataIOError(f"Écriture impossible du manifest {manifest_path}: {e}")

    logger.info(f"💾 {len(entries)} essais écrits dans {out_dir}")
    return manifest_path


def dataset_fingerprint(dataset: Dataset) -> str:
    """Hash MD5 du contenu d'un jeu de données (stimuli, fe, échantillons)"""
    md5_hash = hashlib.md5()
    header = {
        "stimulus_frequencies_hz": list(dataset.manifest.stimulus_frequencies_hz),
        "sampling_rate_hz": dataset.manifest.sampling_rate_hz,
        "channel_names": list(dataset.manifest.channel_names),
    }
    md5_hash.update(json.dumps(header, sort_keys=True).encode('utf-8'))
    for rec in sorted(dataset.recordings, key=lambda r: r.trial_id):
        md5_hash.update(f"{rec.trial_id}|{rec.subject_id}|{rec.stimulus_freq_hz!r}".encode('utf-8'))
        md5_hash.update(np.ascontiguousarray(rec.samples).tobytes())
    return md5_hash.hexdigest()


# ---------------------------------------------------------------------------
# Pré-traitement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PreprocessConfig:
    reference_channel: Optional[str] = None
    bandpass_low_hz: Optional[float] = None
    bandpass_high_hz: Optional[float] = None
    notch_hz: Optional[float] = None
    notch_quality: float = 30.0
    analysis_channel: str = "Oz"
    filter_order: int = 4

    def validate(self, sampling_rate_hz: float, channel_names: Sequence[str]) -> None:
        nyquist = sampling_rate_hz / 2.0
        for name in (self.reference_channel, self.analysis_channel):
            if name is not None and name not in channel_names:
                raise UnknownChannel(f"Canal inconnu '{name}' (disponibles: {', '.join(channel_names)})")

        for edge in (self.bandpass_low_hz, self.bandpass_high_hz, self.notch_hz):
            if edge is not None and edge <= 0:
                raise ConfigError(f"Fréquence de coupure non positive: {edge}")
            if edge is not None and edge >= nyquist:
                raise BandEdgesAboveNyquist(f"{edge} Hz ≥ Nyquist ({nyquist} Hz)")
        if (self.bandpass_low_hz is not None and self.bandpass_high_hz is not None
                and self.bandpass_low_hz >= self.bandpass_high_hz):
            raise ConfigError(
                f"Passe-bande invalide: {self.bandpass_low_hz} Hz ≥ {self.bandpass_high_hz} Hz"
            )
        if self.filter_order < 1:
            raise ConfigError("L'ordre du filtre doit être ≥ 1")

    @classmethod
    def from_dict(cls, data: Optional[Dict]) -> Self:
        data = dict(data or {})
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(f"Section preprocess invalide: {e}")

    def to_dict(self) -> Dict:
        return {
            "reference_channel": self.reference_channel,
            "bandpass_low_hz": self.bandpass_low_hz,
            "bandpass_high_hz": self.bandpass_high_hz,
            "notch_hz": self.notch_hz,
            "notch_quality": self.notch_quality,
            "analysis_channel": self.analysis_channel,
            "filter_order": self.filter_order,
        }


def _bandpass_sos(cfg: PreprocessConfig, fs: float) -> Optional[np.ndarray]:
    low, high = cfg.bandpass_low_hz, cfg.bandpass_high_hz
    if low is not None and high is not None:
        return signal.butter(cfg.filter_order, [low, high], btype="bandpass", fs=fs, output="sos")
    if low is not None:
        return signal.butter(cfg.filter_order, low, btype="highpass", fs=fs, output="sos")
    if high is not None:
        return signal.butter(cfg.filter_order, high, btype="lowpass", fs=fs, output="sos")
    return None


def preprocess(rec: Recording, cfg: PreprocessConfig) -> Recording:
    """Re-référencement, notch optionnel puis passe-bande à phase nulle (forward-backward)"""
    cfg.validate(rec.sampling_rate_hz, rec.channel_names)
    data = np.array(rec.samples, dtype=float)

    if cfg.reference_channel is not None:
        data = data - data[rec.channel_index(cfg.reference_channel)]

    try:
        if cfg.notch_hz is not None:
            b, a = signal.iirnotch(w0=cfg.notch_hz, Q=cfg.notch_quality, fs=rec.sampling_rate_hz)
            data = signal.filtfilt(b, a, data, axis=-1)

        sos = _bandpass_sos(cfg, rec.sampling_rate_hz)
        if sos is not None:
            data = signal.sosfiltfilt(sos, data, axis=-1)
    except ValueError as e:
        # filtfilt refuse les signaux plus courts que sa longueur de padding
        raise SignalTooShort(f"Essai {rec.trial_id} trop court pour le filtrage: {e}")

    return rec.with_samples(data)


def preprocess_dataset(dataset: Dataset, cfg: PreprocessConfig) -> Dataset:
    """Applique ``preprocess`` à tous les essais (le jeu d'origine n'est pas modifié)"""
    cfg.validate(dataset.manifest.sampling_rate_hz, dataset.manifest.channel_names)
    return replace(dataset, recordings=tuple(preprocess(r, cfg) for r in dataset.recordings))
