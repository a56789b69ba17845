"""The normalization vector: estimation, persistence, and application.

The vector is the difference between the mean log spectrum of a
reverberant corpus and that of a clean corpus, and estimates the recording
room's own log spectrum. Subtracting it from the log spectrum of a new
recording and transforming back removes the room: either in one shot over
a whole zero-padded utterance, or frame by frame over long von Hann
windows when utterance-scale latency is unacceptable.

Phase arithmetic throughout is on unwrapped values and results are never
re-wrapped; synthesis only sees the phase through cos/sin, and keeping the
unwrapped numbers makes intermediate vectors diagnosable.
"""

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio_io import AudioBuffer, atomic_write_bytes, read_wav
from .corpus import CorpusManifest, MeanLogSpectrum, accumulate, mean
from .errors import (
    BadMagicError,
    EmptyAccumulatorError,
    LengthMismatchError,
    MetadataMismatchError,
    SampleRateMismatchError,
    TooLongError,
    VersionUnsupportedError,
)
from .rir import RoomImpulseResponse
from .spectral import (
    DEFAULT_EPSILON,
    LogSpectrum,
    forward,
    from_log_spectrum,
    inverse,
    next_pow2,
    to_log_spectrum,
)

PHI_MAGIC = b"PHIV"
PHI_VERSION = 1
_PHI_HEADER = struct.Struct("<4sIIQdQQ")

DEFAULT_FRAME_SECONDS = 1.5
DEFAULT_OVERLAP = 0.5
DEFAULT_HEADROOM_SECONDS = 2.0


@dataclass
class NormalizationVector:
    """Per-bin log-magnitude and unwrapped-phase offsets to subtract."""

    delta_log_mag: np.ndarray
    delta_phase: np.ndarray
    n_uniform: int
    sample_rate: int
    epsilon: float
    reverb_count: int = 0
    clean_count: int = 0
    reverb_digest: str | None = None
    clean_digest: str | None = None

    def __post_init__(self):
        self.delta_log_mag = np.asarray(self.delta_log_mag, dtype=np.float64)
        self.delta_phase = np.asarray(self.delta_phase, dtype=np.float64)
        n = int(self.n_uniform)
        expected = n // 2 + 1
        if n < 2 or n % 2:
            raise ValueError(f"n_uniform must be even and >= 2, got {n}")
        if self.delta_log_mag.shape != (expected,) or self.delta_phase.shape != (expected,):
            raise ValueError(f"vectors must both have length {expected}")
        if not (
            np.all(np.isfinite(self.delta_log_mag)) and np.all(np.isfinite(self.delta_phase))
        ):
            raise ValueError("normalization vector contains NaN or Inf")
        if float(self.epsilon) <= 0.0:
            raise ValueError("epsilon must be positive")
        self.n_uniform = n
        self.sample_rate = int(self.sample_rate)
        self.epsilon = float(self.epsilon)


@dataclass
class FramePlan:
    """Frame geometry for frame-wise normalization: von Hann, 50% overlap."""

    frame_len: int
    hop: int
    window: np.ndarray
    n_uniform_frame: int

    def __post_init__(self):
        if self.frame_len < 2 or self.frame_len % 2:
            raise ValueError(f"frame_len must be even and >= 2, got {self.frame_len}")
        if self.hop != self.frame_len // 2:
            raise ValueError(
                f"hop must be frame_len/2 (50% overlap), got hop={self.hop} "
                f"for frame_len={self.frame_len}"
            )
        self.window = np.asarray(self.window, dtype=np.float64)
        if self.window.shape != (self.frame_len,):
            raise ValueError("window length must equal frame_len")
        if self.n_uniform_frame < self.frame_len or self.n_uniform_frame % 2:
            raise ValueError("n_uniform_frame must be even and >= frame_len")


def hann_window(length: int) -> np.ndarray:
    """Periodic von Hann window; shifted copies at hop length/2 sum to 1."""
    return 0.5 * (1.0 - np.cos(2.0 * math.pi * np.arange(length) / length))


def make_frame_plan(
    sample_rate: int,
    frame_seconds: float = DEFAULT_FRAME_SECONDS,
    overlap: float = DEFAULT_OVERLAP,
    n_uniform_frame: int | None = None,
) -> FramePlan:
    """Build the default plan: 1.5 s von Hann frames with 50% overlap.

    Only 50% overlap is supported; the constant-overlap-add identity this
    module relies on is specific to that hop.
    """
    if overlap != 0.5:
        raise ValueError("only 50% overlap is supported")
    frame_len = int(round(frame_seconds * sample_rate))
    if frame_len % 2:
        raise ValueError(
            f"frame of {frame_seconds} s at {sample_rate} Hz is {frame_len} samples; "
            "frame_len must be even"
        )
    if n_uniform_frame is None:
        n_uniform_frame = next_pow2(frame_len)
    return FramePlan(
        frame_len=frame_len,
        hop=frame_len // 2,
        window=hann_window(frame_len),
        n_uniform_frame=n_uniform_frame,
    )


def num_frames(n_samples: int, plan: FramePlan) -> int:
    """Number of frames: one per hop start strictly inside the signal."""
    return max(1, math.ceil(n_samples / plan.hop))


def frame_signal(o: AudioBuffer, plan: FramePlan) -> list[np.ndarray]:
    """Cut into von Hann windowed frames, zero-padding the tail."""
    x = o.samples
    frames = []
    for m in range(num_frames(len(o), plan)):
        start = m * plan.hop
        seg = x[start : start + plan.frame_len]
        if seg.size < plan.frame_len:
            seg = np.concatenate([seg, np.zeros(plan.frame_len - seg.size)])
        frames.append(seg * plan.window)
    return frames


def estimate_phi(reverb: MeanLogSpectrum, clean: MeanLogSpectrum) -> NormalizationVector:
    """Difference of corpus means: reverberant minus clean."""
    if reverb.count < 1 or clean.count < 1:
        raise EmptyAccumulatorError("both corpora must contain at least one utterance")
    if (
        reverb.n_uniform != clean.n_uniform
        or reverb.sample_rate != clean.sample_rate
        or reverb.epsilon != clean.epsilon
    ):
        raise MetadataMismatchError(
            f"reverberant mean (N={reverb.n_uniform}, fs={reverb.sample_rate}, "
            f"eps={reverb.epsilon}) vs clean mean (N={clean.n_uniform}, "
            f"fs={clean.sample_rate}, eps={clean.epsilon})"
        )
    r = mean(reverb)
    c = mean(clean)
    return NormalizationVector(
        delta_log_mag=r.log_mag - c.log_mag,
        delta_phase=r.phase - c.phase,
        n_uniform=reverb.n_uniform,
        sample_rate=reverb.sample_rate,
        epsilon=reverb.epsilon,
        reverb_count=reverb.count,
        clean_count=clean.count,
    )


def phi_from_rir(
    h: RoomImpulseResponse, n_uniform: int, epsilon: float = DEFAULT_EPSILON
) -> NormalizationVector:
    """Exact normalization vector for a known impulse response."""
    ls = to_log_spectrum(
        forward(AudioBuffer(samples=h.taps, sample_rate=h.sample_rate), n_uniform), epsilon
    )
    return NormalizationVector(
        delta_log_mag=ls.log_mag,
        delta_phase=ls.phase,
        n_uniform=n_uniform,
        sample_rate=h.sample_rate,
        epsilon=epsilon,
    )


def _subtract(ls: LogSpectrum, phi: NormalizationVector) -> LogSpectrum:
    return LogSpectrum(
        log_mag=ls.log_mag - phi.delta_log_mag,
        phase=ls.phase - phi.delta_phase,
        n_uniform=ls.n_uniform,
        sample_rate=ls.sample_rate,
        epsilon=ls.epsilon,
    )


def apply_utterance(o: AudioBuffer, phi: NormalizationVector) -> AudioBuffer:
    """Normalize a whole utterance; output has the full transform length."""
    if o.sample_rate != phi.sample_rate:
        raise SampleRateMismatchError(
            f"utterance at {o.sample_rate} Hz but vector built for {phi.sample_rate} Hz"
        )
    if len(o) > phi.n_uniform:
        raise TooLongError(
            f"utterance of {len(o)} samples exceeds the vector's transform "
            f"length {phi.n_uniform}"
        )
    ls = to_log_spectrum(forward(o, phi.n_uniform), phi.epsilon)
    return inverse(from_log_spectrum(_subtract(ls, phi)))


def apply_framed(o: AudioBuffer, phi: NormalizationVector, plan: FramePlan) -> list[AudioBuffer]:
    """Normalize von Hann windowed frames, each truncated back to frame_len.

    Requires a vector estimated at frame scale: phi.n_uniform must equal
    the plan's transform length. The deconvolution tail past frame_len is
    discarded; frames are meant as direct feature input, with overlap_add
    available as an approximate listening path.
    """
    if phi.n_uniform != plan.n_uniform_frame:
        raise MetadataMismatchError(
            f"vector built for N={phi.n_uniform} cannot normalize frames at "
            f"N={plan.n_uniform_frame}; estimate it at frame scale"
        )
    if o.sample_rate != phi.sample_rate:
        raise SampleRateMismatchError(
            f"utterance at {o.sample_rate} Hz but vector built for {phi.sample_rate} Hz"
        )
    out = []
    for seg in frame_signal(o, plan):
        if not np.any(seg):
            # all-zero frame: normalizing silence yields silence
            out.append(AudioBuffer(samples=np.zeros(plan.frame_len), sample_rate=o.sample_rate))
            continue
        buf = AudioBuffer(samples=seg, sample_rate=o.sample_rate)
        ls = to_log_spectrum(forward(buf, plan.n_uniform_frame), phi.epsilon)
        y = inverse(from_log_spectrum(_subtract(ls, phi)))
        out.append(
            AudioBuffer(samples=y.samples[: plan.frame_len].copy(), sample_rate=o.sample_rate)
        )
    return out


def overlap_add(frames: list[AudioBuffer], plan: FramePlan) -> AudioBuffer:
    """Standard overlap-add at the plan's hop, divided by the COLA constant.

    Interior samples (covered by a full complement of windows) reconstruct
    the windowed content exactly; the first and last hop's worth of samples
    keep only partial window coverage and come out attenuated.
    """
    if not frames:
        raise ValueError("no frames to reconstruct")
    for i, f in enumerate(frames):
        if len(f) != plan.frame_len:
            raise LengthMismatchError(
                f"frame {i} has {len(f)} samples, expected frame_len={plan.frame_len}"
            )
    cover = plan.window[: plan.hop] + plan.window[plan.hop :]
    if float(np.ptp(cover)) > 1e-9:
        raise ValueError("window does not satisfy constant overlap-add at this hop")
    cola = float(np.mean(cover))
    total = (len(frames) - 1) * plan.hop + plan.frame_len
    acc = np.zeros(total, dtype=np.float64)
    for m, f in enumerate(frames):
        acc[m * plan.hop : m * plan.hop + plan.frame_len] += f.samples
    return AudioBuffer(samples=acc / cola, sample_rate=frames[0].sample_rate)


def corpus_mean_framed(
    manifest: CorpusManifest,
    plan: FramePlan,
    epsilon: float = DEFAULT_EPSILON,
) -> MeanLogSpectrum:
    """Mean log spectrum over every windowed frame of every file.

    This is how a frame-scale normalization vector is estimated: the
    corpus is re-cut into the same frames the apply side will use, and
    each frame counts as one utterance at the frame transform length.
    """
    acc = MeanLogSpectrum(
        n_uniform=plan.n_uniform_frame, sample_rate=manifest.sample_rate, epsilon=epsilon
    )
    for path in manifest.files:
        buf = read_wav(path)
        if buf.sample_rate != manifest.sample_rate:
            raise SampleRateMismatchError(
                f"{path}: file at {buf.sample_rate} Hz but manifest declares "
                f"{manifest.sample_rate} Hz"
            )
        for seg in frame_signal(buf, plan):
            if not np.any(seg):
                continue  # silence carries no spectral evidence
            frame = AudioBuffer(samples=seg, sample_rate=buf.sample_rate)
            accumulate(acc, to_log_spectrum(forward(frame, plan.n_uniform_frame), epsilon))
    return acc


def choose_n_uniform(
    longest_samples: int,
    sample_rate: int,
    headroom_seconds: float = DEFAULT_HEADROOM_SECONDS,
) -> int:
    """Default transform length: next power of two covering the longest
    utterance plus reverberation headroom."""
    return next_pow2(longest_samples + int(round(headroom_seconds * sample_rate)))


def save_phi(phi: NormalizationVector, path) -> None:
    """Write the vector to its binary file format (atomically).

    Little-endian layout: magic "PHIV", u32 version, u32 sample_rate,
    u64 n_uniform, f64 epsilon, u64 reverb_count, u64 clean_count, then
    n_uniform/2 + 1 records of (f64 delta_log_mag, f64 delta_phase).
    """
    header = _PHI_HEADER.pack(
        PHI_MAGIC,
        PHI_VERSION,
        phi.sample_rate,
        phi.n_uniform,
        phi.epsilon,
        phi.reverb_count,
        phi.clean_count,
    )
    records = np.empty((phi.delta_log_mag.size, 2), dtype="<f8")
    records[:, 0] = phi.delta_log_mag
    records[:, 1] = phi.delta_phase
    atomic_write_bytes(path, header + records.tobytes())


def load_phi(path) -> NormalizationVector:
    """Read a vector file; raises rather than ever returning a partial vector."""
    raw = Path(path).read_bytes()
    if len(raw) < _PHI_HEADER.size:
        raise BadMagicError(f"{path}: too short to be a normalization-vector file")
    magic, version, sample_rate, n_uniform, epsilon, reverb_count, clean_count = (
        _PHI_HEADER.unpack(raw[: _PHI_HEADER.size])
    )
    if magic != PHI_MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}")
    if version != PHI_VERSION:
        raise VersionUnsupportedError(f"{path}: format version {version} not supported")
    n_bins = n_uniform // 2 + 1
    expected = n_bins * 16
    body = raw[_PHI_HEADER.size :]
    if len(body) != expected:
        raise BadMagicError(
            f"{path}: payload is {len(body)} bytes, expected {expected}; file truncated?"
        )
    records = np.frombuffer(body, dtype="<f8").reshape(n_bins, 2)
    return NormalizationVector(
        delta_log_mag=records[:, 0].copy(),
        delta_phase=records[:, 1].copy(),
        n_uniform=int(n_uniform),
        sample_rate=int(sample_rate),
        epsilon=float(epsilon),
        reverb_count=int(reverb_count),
        clean_count=int(clean_count),
    )
