"""Synthetic room impulse responses and convolution.

The generator is an exponentially decaying Gaussian-noise tail behind a
unit direct-path tap. The decay is tied to T60 (the time for the response
power to fall by 60 dB), which gives every synthesized room a known
ground-truth log spectrum for oracle tests. Measured responses can be
loaded from mono WAV files instead.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .audio_io import AudioBuffer, read_wav, write_wav
from .errors import SampleRateMismatchError


@dataclass
class RoomImpulseResponse:
    """Finite impulse response with optional synthesis metadata."""

    taps: np.ndarray
    sample_rate: int
    t60: float | None = None
    seed: int | None = None

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=np.float64)
        if self.taps.ndim != 1 or self.taps.size < 1:
            raise ValueError("taps must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(self.taps)):
            raise ValueError("taps contain NaN or Inf")
        if int(self.sample_rate) <= 0:
            raise ValueError("sample_rate must be positive")
        self.sample_rate = int(self.sample_rate)

    def __len__(self) -> int:
        return self.taps.size


def decay_envelope(t60: float, sample_rate: int, length: int, direct_delay: int = 0) -> np.ndarray:
    """Amplitude envelope 10**(-3*(k - direct_delay) / (fs * t60)), zero before the direct tap.

    At k - direct_delay == fs * t60 the envelope is exactly 1e-3, i.e. the
    power is down 60 dB.
    """
    k = np.arange(length, dtype=np.float64)
    env = np.power(10.0, -3.0 * (k - direct_delay) / (sample_rate * t60))
    env[:direct_delay] = 0.0
    return env


def synth_rir(
    t60: float,
    sample_rate: int,
    length: int | None = None,
    direct_delay: int = 0,
    seed: int = 0,
) -> RoomImpulseResponse:
    """Generate a synthetic RIR: unit direct tap, then decaying Gaussian noise.

    length defaults to 2 * t60 * sample_rate (the truncation point for the
    nominally infinite tail) and must cover at least the -60 dB point,
    ceil(t60 * sample_rate). Deterministic for a given (seed, params).

    Taps are quantized to float32 precision so writing them to a float32
    WAV and reading them back is an exact round trip.
    """
    if t60 <= 0.0:
        raise ValueError(f"t60 must be positive, got {t60}")
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    if direct_delay < 0:
        raise ValueError("direct_delay must be >= 0")
    if length is None:
        length = int(round(2.0 * t60 * sample_rate))
    min_len = max(direct_delay + 1, math.ceil(t60 * sample_rate))
    if length < min_len:
        raise ValueError(
            f"length {length} too short: need >= {min_len} samples to cover "
            f"direct_delay and the -60 dB decay of t60={t60}"
        )
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(length)
    taps = noise * decay_envelope(t60, sample_rate, length, direct_delay)
    taps[direct_delay] = 1.0
    taps = taps.astype(np.float32).astype(np.float64)
    return RoomImpulseResponse(taps=taps, sample_rate=sample_rate, t60=t60, seed=seed)


def convolve(s: AudioBuffer, h: RoomImpulseResponse) -> AudioBuffer:
    """Full linear convolution; output length len(s) + len(h) - 1."""
    if s.sample_rate != h.sample_rate:
        raise SampleRateMismatchError(
            f"signal at {s.sample_rate} Hz but impulse response at {h.sample_rate} Hz"
        )
    out = fftconvolve(s.samples, h.taps, mode="full")
    return AudioBuffer(samples=out, sample_rate=s.sample_rate)


def load_rir(path) -> RoomImpulseResponse:
    """Load an impulse response from a mono WAV file; t60 is left unset."""
    buf = read_wav(path)
    return RoomImpulseResponse(taps=buf.samples, sample_rate=buf.sample_rate)


def save_rir(rir: RoomImpulseResponse, path) -> None:
    """Store taps as a float32 mono WAV."""
    write_wav(path, AudioBuffer(samples=rir.taps, sample_rate=rir.sample_rate), "float32")
