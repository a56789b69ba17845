"""Uniform-length Fourier analysis and the complex log-spectrum domain.

Every signal in a run is zero-padded to one even transform length N and
analyzed with a real-input DFT, keeping bins 0..N/2 only; full spectra are
reconstructed by conjugate mirroring. In the log domain a spectrum is a
pair of real vectors, log magnitude (nats, floored at a small epsilon) and
unwrapped phase (radians), which is the representation in which
convolution becomes plain addition.
"""

import math
from dataclasses import dataclass

import numpy as np

from .audio_io import AudioBuffer
from .errors import SymmetryViolationError, TooLongError

TWO_PI = 2.0 * math.pi

DEFAULT_EPSILON = 1e-12  # magnitude floor, about -240 dB

# relative tolerance for "this spectrum describes a real signal" checks
_SYMMETRY_RTOL = 1e-9


@dataclass
class ComplexSpectrum:
    """DFT bins 0..N/2 of a real signal at transform length n_uniform."""

    bins: np.ndarray
    n_uniform: int
    sample_rate: int

    def __post_init__(self):
        self.bins = np.asarray(self.bins, dtype=np.complex128)
        n = int(self.n_uniform)
        if n < 2 or n % 2:
            raise ValueError(f"n_uniform must be even and >= 2, got {n}")
        if self.bins.ndim != 1 or self.bins.size != n // 2 + 1:
            raise ValueError(
                f"expected {n // 2 + 1} bins for n_uniform={n}, got {self.bins.size}"
            )
        if not np.all(np.isfinite(self.bins)):
            raise ValueError("bins contain NaN or Inf")
        self.n_uniform = n
        self.sample_rate = int(self.sample_rate)

    @property
    def n_bins(self) -> int:
        return self.bins.size


@dataclass
class LogSpectrum:
    """Log magnitude plus unwrapped phase for bins 0..N/2.

    Carries the transform length, sample rate, and the magnitude floor it
    was computed with, so downstream arithmetic can refuse mismatched
    operands.
    """

    log_mag: np.ndarray
    phase: np.ndarray
    n_uniform: int
    sample_rate: int
    epsilon: float

    def __post_init__(self):
        self.log_mag = np.asarray(self.log_mag, dtype=np.float64)
        self.phase = np.asarray(self.phase, dtype=np.float64)
        n = int(self.n_uniform)
        if n < 2 or n % 2:
            raise ValueError(f"n_uniform must be even and >= 2, got {n}")
        expected = n // 2 + 1
        if self.log_mag.shape != (expected,) or self.phase.shape != (expected,):
            raise ValueError(f"log_mag and phase must both have length {expected}")
        if not (np.all(np.isfinite(self.log_mag)) and np.all(np.isfinite(self.phase))):
            raise ValueError("log spectrum contains NaN or Inf")
        if float(self.epsilon) <= 0.0:
            raise ValueError("epsilon must be positive")
        self.n_uniform = n
        self.sample_rate = int(self.sample_rate)
        self.epsilon = float(self.epsilon)


def zero_pad(buf: AudioBuffer, n_uniform: int) -> AudioBuffer:
    """Append zeros so the buffer has exactly n_uniform samples."""
    n = len(buf)
    if n > n_uniform:
        raise TooLongError(
            f"signal of {n} samples does not fit transform length {n_uniform}"
        )
    if n == n_uniform:
        return AudioBuffer(samples=buf.samples.copy(), sample_rate=buf.sample_rate)
    out = np.zeros(n_uniform, dtype=np.float64)
    out[:n] = buf.samples
    return AudioBuffer(samples=out, sample_rate=buf.sample_rate)


def forward(buf: AudioBuffer, n_uniform: int) -> ComplexSpectrum:
    """DFT of the zero-padded signal, bins 0..N/2."""
    if n_uniform < 2 or n_uniform % 2:
        raise ValueError(f"n_uniform must be even and >= 2, got {n_uniform}")
    if len(buf) > n_uniform:
        raise TooLongError(
            f"signal of {len(buf)} samples does not fit transform length {n_uniform}"
        )
    bins = np.fft.rfft(buf.samples, n=n_uniform)
    # real input makes these exactly real; pin them so the invariant is structural
    bins[0] = bins[0].real
    bins[-1] = bins[-1].real
    return ComplexSpectrum(bins=bins, n_uniform=n_uniform, sample_rate=buf.sample_rate)


def inverse(spec: ComplexSpectrum) -> AudioBuffer:
    """Invert to the time domain by conjugate-mirroring to full length N.

    Bins 0 and N/2 must be (numerically) real; the imaginary residue of
    the raw inverse transform is checked against 1e-9 of the real peak and
    discarded.
    """
    bins = spec.bins
    scale = float(np.max(np.abs(bins))) if bins.size else 0.0
    tol = _SYMMETRY_RTOL * scale
    for k in (0, bins.size - 1):
        if abs(bins[k].imag) > tol:
            raise SymmetryViolationError(
                f"bin {k} has imaginary part {bins[k].imag:.3e} "
                f"(tolerance {tol:.3e}); spectrum does not describe a real signal"
            )
    edge_fixed = bins.copy()
    edge_fixed[0] = edge_fixed[0].real
    edge_fixed[-1] = edge_fixed[-1].real
    full = np.concatenate([edge_fixed, np.conj(edge_fixed[-2:0:-1])])
    y = np.fft.ifft(full)
    real_peak = float(np.max(np.abs(y.real)))
    imag_peak = float(np.max(np.abs(y.imag)))
    if imag_peak > _SYMMETRY_RTOL * max(real_peak, 1e-300):
        raise SymmetryViolationError(
            f"inverse transform left imaginary residue {imag_peak:.3e} "
            f"against real peak {real_peak:.3e}"
        )
    return AudioBuffer(samples=np.ascontiguousarray(y.real), sample_rate=spec.sample_rate)


def unwrap_phase(p) -> np.ndarray:
    """Unwrap a phase sequence so successive values differ by at most pi.

    output[0] equals input[0]; every other element is input[k] plus an
    integer multiple of 2*pi, chosen so consecutive outputs differ by at
    most pi. When both candidates sit exactly pi away the smaller one is
    taken, so outputs always have successive differences in [-pi, pi).
    Deterministic, and idempotent on its own outputs.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError("phase input must be 1-D")
    if p.size == 0:
        return p.copy()
    if not np.all(np.isfinite(p)):
        raise ValueError("phase input contains NaN or Inf")
    if p.size == 1:
        return p.copy()
    dp = np.diff(p)
    turns = np.ceil(-dp / TWO_PI - 0.5)
    out = p.copy()
    out[1:] += TWO_PI * np.cumsum(turns)
    d = np.diff(out)
    # float rounding of the turn products can nudge a difference onto or
    # past the boundary; fall back to the exact per-element walk if so
    if np.all((d >= -math.pi) & (d < math.pi)):
        return out
    return _unwrap_walk(p)


def _unwrap_walk(p: np.ndarray) -> np.ndarray:
    """Per-element walk: examine the rounded turn count and its neighbors,
    prefer the candidate whose step lies in [-pi, pi), break ties toward
    the smaller value."""
    out = np.empty_like(p)
    prev = out[0] = p[0]
    for k in range(1, p.size):
        base = math.ceil((prev - p[k]) / TWO_PI - 0.5)
        best = None
        for t in (base - 1, base, base + 1):
            cand = p[k] + TWO_PI * t
            d = cand - prev
            key = (not (-math.pi <= d < math.pi), abs(d), cand)
            if best is None or key < best[0]:
                best = (key, cand)
        prev = out[k] = best[1]
    return out


def to_log_spectrum(spec: ComplexSpectrum, epsilon: float = DEFAULT_EPSILON) -> LogSpectrum:
    """Complex log of a spectrum: floored log magnitude, unwrapped phase."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    mags = np.abs(spec.bins)
    log_mag = np.log(np.maximum(mags, epsilon))
    raw = np.angle(spec.bins)
    # bins 0 and N/2 are real: phase 0 for nonnegative values, pi otherwise,
    # independent of the sign of a zero imaginary part
    raw[0] = 0.0 if spec.bins[0].real >= 0.0 else math.pi
    raw[-1] = 0.0 if spec.bins[-1].real >= 0.0 else math.pi
    return LogSpectrum(
        log_mag=log_mag,
        phase=unwrap_phase(raw),
        n_uniform=spec.n_uniform,
        sample_rate=spec.sample_rate,
        epsilon=epsilon,
    )


def from_log_spectrum(ls: LogSpectrum) -> ComplexSpectrum:
    """Exponentiate a log spectrum back to complex bins.

    Raises OverflowError when any log magnitude exceeds 700 nats, which
    signals a corrupted normalization vector or degenerate input rather
    than anything exp() can represent.
    """
    peak = float(np.max(ls.log_mag))
    if peak > 700.0:
        raise OverflowError(
            f"log magnitude {peak:.1f} exceeds 700 nats; refusing to exponentiate"
        )
    mags = np.exp(ls.log_mag)
    bins = mags * (np.cos(ls.phase) + 1j * np.sin(ls.phase))
    bins[0] = bins[0].real
    bins[-1] = bins[-1].real
    return ComplexSpectrum(bins=bins, n_uniform=ls.n_uniform, sample_rate=ls.sample_rate)


def next_pow2(n: int) -> int:
    """Smallest power of two >= n (and >= 2)."""
    if n <= 2:
        return 2
    return 1 << (n - 1).bit_length()
