#!/usr/bin/env python3
"""
Générateur SSVEP synthétique déterministe
- Réponse évoquée sélective en fréquence (profil d'amplitude linéaire par morceaux)
- Fond EEG en 1/f obtenu en façonnant un bruit blanc gaussien dans le domaine fréquentiel
- Générateur aléatoire PCG64 (numpy) : mêmes essais sur toutes les plateformes pour une graine donnée
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm
from typing_extensions import Self

from .data_model import Dataset, DatasetManifest, Recording, TrialEntry
from .errors import ConfigError, NyquistViolation, OutOfProfileRange

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResponseProfile:
    """Amplitude relative de la réponse SSVEP (fondamentale) en fonction de la fréquence du stimulus"""
    control_points: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        points = tuple((float(f), float(a)) for f, a in self.control_points)
        object.__setattr__(self, "control_points", points)
        if len(points) < 2:
            raise ConfigError("Un profil de réponse demande au moins 2 points de contrôle")
        freqs = [f for f, _ in points]
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ConfigError("Points de contrôle: fréquences strictement croissantes attendues")
        if any(a <= 0 for _, a in points):
            raise ConfigError("Points de contrôle: amplitudes strictement positives attendues")

    @property
    def min_hz(self) -> float:
        return self.control_points[0][0]

    @property
    def max_hz(self) -> float:
        return self.control_points[-1][0]

    def amplitude(self, f: float) -> float:
        if not (self.min_hz <= f <= self.max_hz):
            raise OutOfProfileRange(f"{f} Hz hors du profil [{self.min_hz}, {self.max_hz}] Hz")
        freqs, amps = zip(*self.control_points)
        return float(np.interp(f, freqs, amps))

    def to_list(self) -> List[List[float]]:
        return [[f, a] for f, a in self.control_points]


# Caricature décroissante de la réponse moyenne aux stimuli à inversion de motif
# (constantes d'implémentation : la bande haute est plus faible)
DEFAULT_PROFILE = ResponseProfile(control_points=(
    (6.0, 1.0),
    (8.0, 1.0),
    (10.0, 0.9),
    (14.0, 0.7),
    (20.0, 0.5),
    (28.0, 0.3),
    (35.0, 0.2),
))


def profile_amplitude(profile: ResponseProfile, f: float) -> float:
    """Interpolation linéaire des points de contrôle du profil"""
    return profile.amplitude(f)


@dataclass(frozen=True)
class SynthSpec:
    stimulus_freq_hz: float
    duration_s: float
    sampling_rate_hz: float
    n_channels: int = 1
    profile: ResponseProfile = DEFAULT_PROFILE
    harmonic_ratio: float = 0.5
    noise_exponent: float = 1.0
    snr_scale: float = 1.0
    rng_seed: int = 0
    noise_std_uv: float = 1.0
    channel_names: Optional[Tuple[str, ...]] = None
    subject_id: str = "S01"
    trial_id: str = "T0001"

    def __post_init__(self):
        if self.channel_names is not None:
            object.__setattr__(self, "channel_names", tuple(self.channel_names))
            if len(self.channel_names) != self.n_channels:
                raise ConfigError("channel_names doit contenir n_channels noms")
        if self.stimulus_freq_hz <= 0 or self.duration_s <= 0 or self.sampling_rate_hz <= 0:
            raise ConfigError("Fréquence, durée et fréquence d'échantillonnage doivent être positives")
        if 2.0 * self.stimulus_freq_hz >= self.sampling_rate_hz / 2.0:
            raise NyquistViolation(
                f"Seconde harmonique {2.0 * self.stimulus_freq_hz} Hz ≥ Nyquist ({self.sampling_rate_hz / 2.0} Hz)"
            )
        if not (0.0 < self.harmonic_ratio <= 1.0):
            raise ConfigError(f"harmonic_ratio doit être dans (0, 1], reçu {self.harmonic_ratio}")
        if self.snr_scale < 0 or self.noise_std_uv < 0:
            raise ConfigError("snr_scale et noise_std_uv doivent être ≥ 0")
        if self.n_channels < 1:
            raise ConfigError("n_channels doit être ≥ 1")

    def resolved_channel_names(self) -> Tuple[str, ...]:
        if self.channel_names is not None:
            return self.channel_names
        return tuple(f"Ch{i + 1}" for i in range(self.n_channels))


def colored_noise(n_samples: int, n_channels: int, exponent: float, rng: np.random.Generator) -> np.ndarray:
    """Bruit gaussien de puissance ∝ 1/f^exponent, variance unitaire par canal"""
    white = rng.standard_normal((n_channels, n_samples))
    spectrum = np.fft.rfft(white, axis=-1)
    freqs = np.fft.rfftfreq(n_samples)

    scaling = np.zeros_like(freqs)
    scaling[1:] = freqs[1:] ** (-exponent / 2.0)
    shaped = np.fft.irfft(spectrum * scaling, n=n_samples, axis=-1)

    std = shaped.std(axis=-1, keepdims=True)
    std[std == 0] = 1.0
    return shaped / std


def generate_trial(spec: SynthSpec) -> Recording:
    """Fond 1/f + sinusoïde à f0 (amplitude profil·snr) + sinusoïde à 2f0 (× harmonic_ratio)"""
    rng = np.random.Generator(np.random.PCG64(spec.rng_seed))
    n_samples = int(round(spec.duration_s * spec.sampling_rate_hz))
    t = np.arange(n_samples) / spec.sampling_rate_hz

    amplitude = spec.profile.amplitude(spec.stimulus_freq_hz) * spec.snr_scale
    phase_fundamental, phase_harmonic = rng.uniform(0.0, 2.0 * np.pi, size=2)
    evoked = (amplitude * np.sin(2.0 * np.pi * spec.stimulus_freq_hz * t + phase_fundamental)
              + spec.harmonic_ratio * amplitude * np.sin(4.0 * np.pi * spec.stimulus_freq_hz * t + phase_harmonic))

    background = spec.noise_std_uv * colored_noise(n_samples, spec.n_channels, spec.noise_exponent, rng)

    return Recording(
        samples=background + evoked[np.newaxis, :],
        sampling_rate_hz=spec.sampling_rate_hz,
        channel_names=spec.resolved_channel_names(),
        stimulus_freq_hz=spec.stimulus_freq_hz,
        subject_id=spec.subject_id,
        trial_id=spec.trial_id,
        seed=spec.rng_seed,
    )


# ---------------------------------------------------------------------------
# Jeux de données complets
# ---------------------------------------------------------------------------

PRESETS: Dict[str, Dict] = {
    # 3 stimuli dont un dans la bande haute, référence Cz disponible
    "dataset_a": {
        "name": "synthetic-dataset-a",
        "stimulus_frequencies_hz": [8.0, 14.0, 28.0],
        "sampling_rate_hz": 256.0,
        "duration_s": 15.0,
        "n_subjects": 4,
        "repetitions": 5,
        "channel_names": ["Oz", "O1", "O2", "Cz"],
    },
    # 7 stimuli rapprochés en bande basse
    "dataset_b": {
        "name": "synthetic-dataset-b",
        "stimulus_frequencies_hz": [6.0, 6.5, 7.0, 7.5, 8.2, 9.3, 10.0],
        "sampling_rate_hz": 512.0,
        "duration_s": 30.0,
        "n_subjects": 4,
        "repetitions": 3,
        "channel_names": ["Oz", "Fpz", "Pz"],
    },
}


@dataclass(frozen=True)
class SynthConfig:
    name: str = "synthetic-dataset-a"
    stimulus_frequencies_hz: Tuple[float, ...] = (8.0, 14.0, 28.0)
    sampling_rate_hz: float = 256.0
    duration_s: float = 15.0
    n_subjects: int = 4
    repetitions: int = 5
    channel_names: Tuple[str, ...] = ("Oz", "O1", "O2", "Cz")
    profile: ResponseProfile = DEFAULT_PROFILE
    harmonic_ratio: float = 0.5
    noise_exponent: float = 1.0
    snr_scale: float = 1.0
    noise_std_uv: float = 1.0
    subject_snr_spread: float = 0.2
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "stimulus_frequencies_hz", tuple(float(f) for f in self.stimulus_frequencies_hz))
        object.__setattr__(self, "channel_names", tuple(self.channel_names))
        if len(self.stimulus_frequencies_hz) < 2:
            raise ConfigError("Au moins 2 stimuli requis")
        if self.n_subjects < 1 or self.repetitions < 1:
            raise ConfigError("n_subjects et repetitions doivent être ≥ 1")
        if self.subject_snr_spread < 0:
            raise ConfigError("subject_snr_spread doit être ≥ 0")
        if not self.channel_names:
            raise ConfigError("Liste de canaux vide")
        for f in self.stimulus_frequencies_hz:
            self.profile.amplitude(f)

    @property
    def n_trials(self) -> int:
        return self.n_subjects * len(self.stimulus_frequencies_hz) * self.repetitions

    @classmethod
    def from_dict(cls, data: Dict) -> Self:
        data = dict(data)
        preset = data.pop("preset", None)
        merged: Dict = {}
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigError(f"Preset inconnu: {preset} (disponibles: {', '.join(PRESETS)})")
            merged.update(PRESETS[preset])
        merged.update(data)
        if "profile" in merged:
            merged["profile"] = ResponseProfile(control_points=tuple(tuple(p) for p in merged["profile"]))
        try:
            return cls(**merged)
        except TypeError as e:
            raise ConfigError(f"Configuration de simulation invalide: {e}")

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "stimulus_frequencies_hz": list(self.stimulus_frequencies_hz),
            "sampling_rate_hz": self.sampling_rate_hz,
            "duration_s": self.duration_s,
            "n_subjects": self.n_subjects,
            "repetitions": self.repetitions,
            "channel_names": list(self.channel_names),
            "profile": self.profile.to_list(),
            "harmonic_ratio": self.harmonic_ratio,
            "noise_exponent": self.noise_exponent,
            "snr_scale": self.snr_scale,
            "noise_std_uv": self.noise_std_uv,
            "subject_snr_spread": self.subject_snr_spread,
            "seed": self.seed,
        }


def subject_snr_factor(cfg: SynthConfig, subject: int) -> float:
    """Facteur de RSB propre au sujet (log-normal, déterministe)"""
    if cfg.subject_snr_spread == 0:
        return 1.0
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, 0, subject])))
    return float(rng.lognormal(mean=0.0, sigma=cfg.subject_snr_spread))


def trial_seed(master_seed: int, subject: int, stimulus: int, repetition: int) -> int:
    return int(np.random.SeedSequence([master_seed, 1, subject, stimulus, repetition]).generate_state(1)[0])


def simulate_dataset(cfg: SynthConfig, progress: bool = False) -> Dataset:
    """Sujets × stimuli × répétitions essais synthétiques"""
    logger.info(f"🔄 Simulation de {cfg.n_trials} essais ({cfg.n_subjects} sujets × "
                f"{len(cfg.stimulus_frequencies_hz)} stimuli × {cfg.repetitions} répétitions)")

    recordings = []
    entries = []
    for s in tqdm(range(cfg.n_subjects), desc="  sujets", disable=not progress):
        subject_id = f"S{s + 1:02d}"
        factor = subject_snr_factor(cfg, s)
        logger.debug(f"   {subject_id}: facteur RSB {factor:.3f}")
        for k, freq in enumerate(cfg.stimulus_frequencies_hz):
            for r in range(cfg.repetitions):
                trial_id = f"{subject_id}_f{k + 1:02d}_r{r + 1:02d}"
                seed = trial_seed(cfg.seed, s, k, r)
                rec = generate_trial(SynthSpec(
                    stimulus_freq_hz=freq,
                    duration_s=cfg.duration_s,
                    sampling_rate_hz=cfg.sampling_rate_hz,
                    n_channels=len(cfg.channel_names),
                    profile=cfg.profile,
                    harmonic_ratio=cfg.harmonic_ratio,
                    noise_exponent=cfg.noise_exponent,
                    snr_scale=cfg.snr_scale * factor,
                    rng_seed=seed,
                    noise_std_uv=cfg.noise_std_uv,
                    channel_names=cfg.channel_names,
                    subject_id=subject_id,
                    trial_id=trial_id,
                ))
                recordings.append(rec)
                entries.append(TrialEntry(
                    trial_id=trial_id,
                    subject_id=subject_id,
                    stimulus_freq_hz=freq,
                    file=f"trials/{trial_id}.csv",
                    seed=seed,
                ))

    manifest = DatasetManifest(
        name=cfg.name,
        stimulus_frequencies_hz=cfg.stimulus_frequencies_hz,
        sampling_rate_hz=cfg.sampling_rate_hz,
        channel_names=cfg.channel_names,
        trials=tuple(entries),
    )
    return Dataset(manifest=manifest, recordings=tuple(recordings))
