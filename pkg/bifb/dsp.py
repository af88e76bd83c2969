"""
Segmentation avec recouvrement, fenêtre de Hamming et périodogramme.

Convention du périodogramme : S[f] = (1/N)·|Σ x[n]·w[n]·e^(−j2πfn/N)|² sur la
grille des bins DFT, spectre unilatéral sans repliement ×2, fenêtre non
normalisée en amplitude.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List

import numpy as np
from scipy.signal import windows

from .errors import ConfigError, SignalTooShort

logger = logging.getLogger(__name__)

MIN_SEGMENT_SAMPLES = 8


@dataclass(frozen=True, eq=False)
class Segment:
    """Tranche de signal (1-D, ou canaux × N pour les méthodes multicanales)"""
    samples: np.ndarray
    start_time_s: float
    sampling_rate_hz: float

    @property
    def n_samples(self) -> int:
        return self.samples.shape[-1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sampling_rate_hz

    @property
    def end_time_s(self) -> float:
        return self.start_time_s + self.duration_s


@dataclass(frozen=True, eq=False)
class Spectrum:
    power: np.ndarray
    sampling_rate_hz: float
    n_fft: int
    n_samples: int

    @property
    def bin_resolution_hz(self) -> float:
        return self.sampling_rate_hz / self.n_fft

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.power.shape[-1]) * self.bin_resolution_hz

    @property
    def max_frequency_hz(self) -> float:
        return (self.power.shape[-1] - 1) * self.bin_resolution_hz


def segment_length_samples(seg_len_s: float, sampling_rate_hz: float) -> int:
    n = int(round(seg_len_s * sampling_rate_hz))
    if n < MIN_SEGMENT_SAMPLES:
        raise ConfigError(f"Segment de {seg_len_s} s trop court ({n} < {MIN_SEGMENT_SAMPLES} échantillons)")
    return n


def segment_stream(signal: np.ndarray, seg_len_s: float, overlap_fraction: float,
                   sampling_rate_hz: float) -> List[Segment]:
    """Découpe le signal (temps sur le dernier axe) en segments recouvrants; le dernier segment partiel est ignoré"""
    if not (0.0 <= overlap_fraction < 1.0):
        raise ConfigError(f"overlap_fraction doit être dans [0, 1), reçu {overlap_fraction}")
    signal = np.asarray(signal)
    seg_len = segment_length_samples(seg_len_s, sampling_rate_hz)
    total = signal.shape[-1]
    if total < seg_len:
        raise SignalTooShort(f"Signal de {total} échantillons < un segment de {seg_len}")

    hop = max(1, int(round(seg_len * (1.0 - overlap_fraction))))
    n_segments = (total - seg_len) // hop + 1
    return [
        Segment(
            samples=signal[..., i * hop:i * hop + seg_len],
            start_time_s=i * hop / sampling_rate_hz,
            sampling_rate_hz=sampling_rate_hz,
        )
        for i in range(n_segments)
    ]


@lru_cache(maxsize=32)
def _hamming(n: int) -> np.ndarray:
    w = windows.hamming(n, sym=True)
    w.setflags(write=False)
    return w


def hamming_window(N: int) -> np.ndarray:
    """w[n] = 0.54 − 0.46·cos(2πn/(N−1)), n = 0…N−1"""
    if N < 2:
        raise ConfigError(f"Fenêtre de Hamming: N ≥ 2 requis, reçu {N}")
    return _hamming(int(N)).copy()


def psd(seg: Segment, zero_pad_factor: int = 1) -> Spectrum:
    """Périodogramme fenêtré (Hamming) sur la grille DFT, spectre unilatéral"""
    x = np.asarray(seg.samples)
    if x.ndim != 1:
        raise ConfigError("psd attend un segment monocanal")
    n = x.shape[0]
    if n < MIN_SEGMENT_SAMPLES:
        raise SignalTooShort(f"Segment de {n} échantillons < {MIN_SEGMENT_SAMPLES}")
    if zero_pad_factor < 1:
        raise ConfigError("zero_pad_factor doit être ≥ 1")

    n_fft = n * int(zero_pad_factor)
    # fft (et non rfft) : accepte aussi les segments complexes
    spectrum = np.fft.fft(x * _hamming(n), n=n_fft)[:n_fft // 2 + 1]
    power = (np.abs(spectrum) ** 2) / n
    return Spectrum(power=power, sampling_rate_hz=seg.sampling_rate_hz, n_fft=n_fft, n_samples=n)
