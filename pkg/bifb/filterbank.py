#!/usr/bin/env python3
"""
Bancs de filtres fréquentiels
- Filtres triangulaires bio-inspirés (gain et largeur de bande par stimulus)
- Filtres unitaires (indicatrice d'intervalle fermé)
- Extraction de caractéristiques : x_i = Σ_f S[f]·H_i[f] sur la grille du périodogramme

Ordre des 2K filtres : fondamentales f̃_1…f̃_K puis secondes harmoniques 2f̃_1…2f̃_K.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from typing_extensions import Literal, Self

from .dsp import Spectrum
from .errors import BankExceedsSpectrumRange, ConfigError, NonPositiveParameter, NyquistViolation
from .synth import DEFAULT_PROFILE, ResponseProfile

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class TriFilter:
    center_hz: float
    bandwidth_hz: float
    gain: float

    def __post_init__(self):
        if self.bandwidth_hz <= 0 or self.gain <= 0:
            raise NonPositiveParameter(
                f"Filtre {self.center_hz} Hz: largeur ({self.bandwidth_hz}) et gain ({self.gain}) doivent être > 0"
            )
        if self.center_hz - self.bandwidth_hz / 2.0 <= 0:
            raise NonPositiveParameter(f"Filtre {self.center_hz} Hz: support qui déborde sous 0 Hz")

    @property
    def low_hz(self) -> float:
        return self.center_hz - self.bandwidth_hz / 2.0

    @property
    def high_hz(self) -> float:
        return self.center_hz + self.bandwidth_hz / 2.0

    def response(self, f: ArrayLike) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        rising = (f - self.low_hz) / self.bandwidth_hz * self.gain
        falling = (self.high_hz - f) / self.bandwidth_hz * self.gain
        return np.where(
            (f >= self.low_hz) & (f <= self.center_hz), rising,
            np.where((f >= self.center_hz) & (f <= self.high_hz), falling, 0.0),
        )


@dataclass(frozen=True)
class UnitFilter:
    center_hz: float
    half_width_hz: float

    def __post_init__(self):
        if self.half_width_hz <= 0:
            raise NonPositiveParameter(f"Filtre unitaire {self.center_hz} Hz: demi-largeur non positive")

    @property
    def low_hz(self) -> float:
        return self.center_hz - self.half_width_hz

    @property
    def high_hz(self) -> float:
        return self.center_hz + self.half_width_hz

    def response(self, f: ArrayLike) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        return ((f >= self.low_hz) & (f <= self.high_hz)).astype(float)


def tri_response(filt: TriFilter, f: float) -> float:
    return float(filt.response(f))


def unit_response(filt: UnitFilter, f: float) -> float:
    return float(filt.response(f))


@dataclass(frozen=True)
class FilterBank:
    filters: Tuple[Union[TriFilter, UnitFilter], ...]
    kind: Literal["triangular", "unit"]

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple(self.filters))
        if len(self.filters) % 2 or not self.filters:
            raise ConfigError(f"Un banc contient 2K filtres, reçu {len(self.filters)}")
        k = self.n_classes
        for i in range(k):
            fundamental, harmonic = self.filters[i], self.filters[k + i]
            if abs(harmonic.center_hz - 2.0 * fundamental.center_hz) > 1e-9:
                raise ConfigError(
                    f"Filtre {k + i + 1} centré à {harmonic.center_hz} Hz au lieu de 2 × {fundamental.center_hz} Hz"
                )

    @property
    def n_classes(self) -> int:
        return len(self.filters) // 2

    @property
    def n_features(self) -> int:
        return len(self.filters)

    @property
    def stimuli(self) -> Tuple[float, ...]:
        return tuple(f.center_hz for f in self.filters[:self.n_classes])

    @property
    def max_frequency_hz(self) -> float:
        return max(f.high_hz for f in self.filters)

    @property
    def gains(self) -> np.ndarray:
        """Gain de chaque filtre (1 pour les filtres unitaires)"""
        return np.array([getattr(f, "gain", 1.0) for f in self.filters])

    @property
    def feature_weights(self) -> np.ndarray:
        """Gains normalisés (max = 1), réappliqués après standardisation des caractéristiques"""
        gains = self.gains
        return gains / gains.max()

    def response_matrix(self, freqs: np.ndarray) -> np.ndarray:
        """Matrice (2K × bins) des réponses aux fréquences des bins"""
        return np.vstack([f.response(freqs) for f in self.filters])

    def to_dict(self) -> Dict:
        if self.kind == "triangular":
            return {
                "kind": self.kind,
                "stimuli_hz": list(self.stimuli),
                "gains": [f.gain for f in self.filters],
                "bandwidths_hz": [f.bandwidth_hz for f in self.filters],
            }
        return {
            "kind": self.kind,
            "stimuli_hz": list(self.stimuli),
            "half_widths_hz": [f.half_width_hz for f in self.filters],
        }

    @classmethod
    def from_dict(cls, data: Dict, sampling_rate_hz: Optional[float] = None) -> Self:
        try:
            if data["kind"] == "triangular":
                return build_bifb(data["stimuli_hz"], data["gains"], data["bandwidths_hz"], sampling_rate_hz)
            if data["kind"] == "unit":
                half_widths = data["half_widths_hz"]
                bank = build_uf(data["stimuli_hz"], half_widths[0], sampling_rate_hz)
                if len(set(half_widths)) > 1:
                    filters = tuple(UnitFilter(f.center_hz, hw) for f, hw in zip(bank.filters, half_widths))
                    bank = cls(filters=filters, kind="unit")
                return bank
        except (KeyError, TypeError) as e:
            raise ConfigError(f"Banc de filtres invalide: {e}")
        raise ConfigError(f"Type de banc inconnu: {data.get('kind')}")


def _check_nyquist(bank: FilterBank, sampling_rate_hz: Optional[float]) -> None:
    if sampling_rate_hz is None:
        return
    nyquist = sampling_rate_hz / 2.0
    for i, filt in enumerate(bank.filters):
        if filt.high_hz > nyquist:
            raise NyquistViolation(
                f"Filtre {i + 1} ({filt.low_hz:.2f}–{filt.high_hz:.2f} Hz) au-delà de Nyquist ({nyquist} Hz)"
            )


def _warn_overlaps(bank: FilterBank) -> None:
    stimuli = bank.stimuli
    for k, filt in enumerate(bank.filters[:bank.n_classes]):
        neighbours = [f for j, f in enumerate(stimuli) if j != k and filt.low_hz <= f <= filt.high_hz]
        if neighbours:
            logger.warning(f"⚠️ Le filtre de {filt.center_hz} Hz couvre aussi {neighbours} Hz")


def build_bifb(stimuli: Sequence[float], gains: Sequence[float], bandwidths: Sequence[float],
               sampling_rate_hz: Optional[float] = None) -> FilterBank:
    """Banc de 2K filtres triangulaires (fondamentales puis harmoniques)"""
    stimuli = [float(f) for f in stimuli]
    k = len(stimuli)
    if len(gains) != 2 * k or len(bandwidths) != 2 * k:
        raise ConfigError(f"{2 * k} gains et {2 * k} largeurs de bande attendus pour {k} stimuli")

    centers = stimuli + [2.0 * f for f in stimuli]
    bank = FilterBank(
        filters=tuple(TriFilter(c, float(bw), float(g)) for c, g, bw in zip(centers, gains, bandwidths)),
        kind="triangular",
    )
    _check_nyquist(bank, sampling_rate_hz)
    _warn_overlaps(bank)
    return bank


def build_uf(stimuli: Sequence[float], half_width_hz: float,
             sampling_rate_hz: Optional[float] = None) -> FilterBank:
    """Banc de 2K filtres unitaires de demi-largeur BW_D"""
    stimuli = [float(f) for f in stimuli]
    centers = stimuli + [2.0 * f for f in stimuli]
    bank = FilterBank(filters=tuple(UnitFilter(c, float(half_width_hz)) for c in centers), kind="unit")
    _check_nyquist(bank, sampling_rate_hz)
    return bank


def inverse_profile_weights(stimuli: Sequence[float], profile: ResponseProfile = DEFAULT_PROFILE,
                            exponent: float = 1.0) -> np.ndarray:
    """(1/profil(f_k))^exponent, normalisé pour que le plus petit poids vaille 1"""
    inverse = np.array([1.0 / profile.amplitude(f) for f in stimuli]) ** exponent
    return inverse / inverse.min()


def shaped_bifb(stimuli: Sequence[float], profile: ResponseProfile = DEFAULT_PROFILE,
                gamma: float = 1.0, beta: float = 1.0, base_bandwidth_hz: float = 2.0,
                sampling_rate_hz: Optional[float] = None,
                gain_factors: Optional[Sequence[float]] = None,
                bandwidth_factors: Optional[Sequence[float]] = None) -> FilterBank:
    """Initialisation bio-inspirée : gain ∝ (1/profil)^γ, largeur = β·base·(1/profil)

    Les filtres harmoniques reprennent les paramètres de leur fondamentale.
    ``gain_factors`` / ``bandwidth_factors`` (K valeurs) affinent classe par classe.
    """
    if beta <= 0 or base_bandwidth_hz <= 0:
        raise NonPositiveParameter("beta et base_bandwidth_hz doivent être > 0")
    k = len(stimuli)
    gains = inverse_profile_weights(stimuli, profile, gamma)
    bandwidths = beta * base_bandwidth_hz * inverse_profile_weights(stimuli, profile, 1.0)
    if gain_factors is not None:
        gains = gains * np.asarray(gain_factors, dtype=float)
    if bandwidth_factors is not None:
        bandwidths = bandwidths * np.asarray(bandwidth_factors, dtype=float)
    if gains.shape != (k,) or bandwidths.shape != (k,):
        raise ConfigError(f"{k} facteurs par classe attendus")
    return build_bifb(stimuli, np.tile(gains, 2), np.tile(bandwidths, 2), sampling_rate_hz)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    x: np.ndarray
    trial_id: Optional[str] = None
    segment_index: Optional[int] = None


@lru_cache(maxsize=64)
def _cached_response(bank: FilterBank, n_bins: int, resolution_hz: float) -> np.ndarray:
    matrix = bank.response_matrix(np.arange(n_bins) * resolution_hz)
    matrix.setflags(write=False)
    return matrix


def feature_matrix(spec: Spectrum, bank: FilterBank) -> np.ndarray:
    """Réponses du banc aux bins du spectre (vérifie que le banc tient dans la plage)"""
    if bank.max_frequency_hz > spec.max_frequency_hz:
        raise BankExceedsSpectrumRange(
            f"Le banc monte à {bank.max_frequency_hz:.2f} Hz, le spectre s'arrête à {spec.max_frequency_hz:.2f} Hz"
        )
    return _cached_response(bank, spec.power.shape[-1], spec.bin_resolution_hz)


def extract_features(spec: Spectrum, bank: FilterBank, trial_id: Optional[str] = None,
                     segment_index: Optional[int] = None) -> FeatureVector:
    """x_i = Σ_f S[f]·H_i[f], i = 1…2K"""
    x = feature_matrix(spec, bank) @ spec.power
    return FeatureVector(x=x, trial_id=trial_id, segment_index=segment_index)
