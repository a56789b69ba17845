"""Synthetic speech-like test material.

Colored noise under a randomly varying amplitude envelope. Nothing here
pretends to be speech; it just has the properties the experiments need:
broadband spectra with per-utterance variation, energy concentrated after
onset, and bounded amplitude.
"""

import numpy as np
from scipy.signal import lfilter

from .audio_io import AudioBuffer


def make_utterance(
    rng: np.random.Generator,
    sample_rate: int = 16000,
    min_seconds: float = 1.0,
    max_seconds: float = 2.0,
) -> AudioBuffer:
    """One colored-noise utterance with a random amplitude envelope."""
    n = int(rng.integers(int(min_seconds * sample_rate), int(max_seconds * sample_rate) + 1))
    white = rng.standard_normal(n)
    pole = rng.uniform(0.5, 0.95)
    colored = lfilter([1.0], [1.0, -pole], white)

    # slow envelope from a handful of random control points, with a short
    # fade-in/out so utterances start and end near silence
    n_points = int(rng.integers(6, 16))
    anchors = rng.uniform(0.25, 1.0, size=n_points)
    env = np.interp(np.arange(n), np.linspace(0, n - 1, n_points), anchors)
    fade = min(n // 8, int(0.05 * sample_rate))
    if fade > 0:
        ramp = np.linspace(0.0, 1.0, fade)
        env[:fade] *= ramp
        env[-fade:] *= ramp[::-1]

    x = colored * env
    peak = float(np.max(np.abs(x)))
    x *= rng.uniform(0.3, 0.8) / peak
    return AudioBuffer(samples=x, sample_rate=sample_rate)


def make_corpus(
    rng: np.random.Generator,
    count: int,
    sample_rate: int = 16000,
    min_seconds: float = 1.0,
    max_seconds: float = 2.0,
) -> list[AudioBuffer]:
    return [
        make_utterance(rng, sample_rate, min_seconds, max_seconds) for _ in range(count)
    ]
