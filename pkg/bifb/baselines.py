"""
Méthodes de comparaison sans apprentissage : PSDA harmonique, PSDA à pic, CCA.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import linalg

from .dsp import Spectrum
from .errors import BandExceedsSpectrumRange, BankExceedsSpectrumRange, DegenerateCovariance, NyquistViolation
from .filterbank import build_uf, feature_matrix

logger = logging.getLogger(__name__)

CCA_REGULARIZATION = 1e-10
PEAK_SEARCH_MARGIN_HZ = 1.0


@dataclass(frozen=True, eq=False)
class CcaReference:
    frequency_hz: float
    n_harmonics: int
    matrix: np.ndarray


@lru_cache(maxsize=128)
def _reference_matrix(frequency_hz: float, n_samples: int, sampling_rate_hz: float, n_harmonics: int) -> np.ndarray:
    t = np.arange(n_samples) / sampling_rate_hz
    rows = []
    for h in range(1, n_harmonics + 1):
        rows.append(np.sin(2 * np.pi * h * frequency_hz * t))
        rows.append(np.cos(2 * np.pi * h * frequency_hz * t))
    matrix = np.vstack(rows)
    matrix.setflags(write=False)
    return matrix


def build_reference(frequency_hz: float, n_samples: int, sampling_rate_hz: float,
                    n_harmonics: int = 2) -> CcaReference:
    """Série de Fourier [sin; cos] des harmoniques 1…N_h"""
    if n_harmonics * frequency_hz >= sampling_rate_hz / 2.0:
        raise NyquistViolation(
            f"Référence CCA: {n_harmonics} × {frequency_hz} Hz ≥ Nyquist ({sampling_rate_hz / 2.0} Hz)"
        )
    return CcaReference(
        frequency_hz=float(frequency_hz),
        n_harmonics=int(n_harmonics),
        matrix=_reference_matrix(float(frequency_hz), int(n_samples), float(sampling_rate_hz), int(n_harmonics)),
    )


def psda_scores(spec: Spectrum, stimuli: Sequence[float], half_width_hz: float) -> np.ndarray:
    """c_k = énergie de la bande fondamentale + énergie de la bande harmonique"""
    bank = build_uf(stimuli, half_width_hz)
    try:
        energies = feature_matrix(spec, bank) @ spec.power
    except BankExceedsSpectrumRange as e:
        raise BandExceedsSpectrumRange(str(e))
    k = bank.n_classes
    return energies[:k] + energies[k:]


def psda_recognize(spec: Spectrum, stimuli: Sequence[float], half_width_hz: float) -> int:
    return int(np.argmax(psda_scores(spec, stimuli, half_width_hz)))


def psda_peak_recognize(spec: Spectrum, stimuli: Sequence[float]) -> int:
    """Stimulus le plus proche du pic spectral dans [min − 1 Hz, max + 1 Hz]"""
    stimuli = np.asarray(stimuli, dtype=float)
    freqs = spec.frequencies
    low, high = stimuli.min() - PEAK_SEARCH_MARGIN_HZ, stimuli.max() + PEAK_SEARCH_MARGIN_HZ
    if high > spec.max_frequency_hz:
        raise BandExceedsSpectrumRange(f"Recherche du pic jusqu'à {high} Hz > {spec.max_frequency_hz:.2f} Hz")
    in_range = np.flatnonzero((freqs >= low) & (freqs <= high))
    peak_hz = freqs[in_range[np.argmax(spec.power[in_range])]]
    return int(np.argmin(np.abs(stimuli - peak_hz)))


def _regularized(cov: np.ndarray) -> np.ndarray:
    p = cov.shape[0]
    return cov + CCA_REGULARIZATION * np.trace(cov) / p * np.eye(p)


def cca_correlation(A: np.ndarray, B: np.ndarray) -> float:
    """Plus grande corrélation canonique entre les lignes de A et celles de B"""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise DegenerateCovariance(f"Longueurs temporelles différentes: {A.shape[1]} vs {B.shape[1]}")
    n = A.shape[1]
    if n <= max(A.shape[0], B.shape[0]):
        raise DegenerateCovariance(f"{n} échantillons pour {max(A.shape[0], B.shape[0])} lignes")

    # le problème aux valeurs propres se pose côté le plus petit
    if A.shape[0] > B.shape[0]:
        A, B = B, A
    A = A - A.mean(axis=1, keepdims=True)
    B = B - B.mean(axis=1, keepdims=True)

    c_aa = _regularized(A @ A.T / n)
    c_bb = _regularized(B @ B.T / n)
    c_ab = A @ B.T / n
    if np.trace(c_aa) <= 0 or np.trace(c_bb) <= 0:
        raise DegenerateCovariance("Bloc de covariance nul (ligne constante)")

    try:
        m = c_ab @ linalg.solve(c_bb, c_ab.T, assume_a="pos")
        m = (m + m.T) / 2.0
        rho_squared = linalg.eigh(m, c_aa, eigvals_only=True)[-1]
    except (linalg.LinAlgError, ValueError) as e:
        raise DegenerateCovariance(f"Covariance dégénérée: {e}")
    return float(np.sqrt(np.clip(rho_squared, 0.0, 1.0)))


def cca_scores(eeg: np.ndarray, stimuli: Sequence[float], n_harmonics: int, sampling_rate_hz: float) -> np.ndarray:
    eeg = np.atleast_2d(np.asarray(eeg, dtype=float))
    return np.array([
        cca_correlation(eeg, build_reference(f, eeg.shape[1], sampling_rate_hz, n_harmonics).matrix)
        for f in stimuli
    ])


def cca_recognize(eeg: np.ndarray, stimuli: Sequence[float], n_harmonics: int, sampling_rate_hz: float) -> int:
    """argmax_k ρ_k (égalité → plus petit indice)"""
    return int(np.argmax(cca_scores(eeg, stimuli, n_harmonics, sampling_rate_hz)))
