"""Dereverberation quality metrics.

Desk-scale proxies standing in for recognition-based evaluation: framewise
log-spectral distance between waveforms, accuracy of an estimated
normalization vector against a known impulse response, and time-domain RMS
error after searching out the best integer delay and scalar gain.
"""

import json
from dataclasses import dataclass

import numpy as np

from .audio_io import AudioBuffer
from .errors import MetadataMismatchError, SampleRateMismatchError
from .normalize import FramePlan, NormalizationVector, frame_signal
from .rir import RoomImpulseResponse
from .spectral import forward


@dataclass
class EvalReport:
    lsd_db: float
    time_domain_rmse: float
    phi_mag_err: float | None = None

    def __post_init__(self):
        for name in ("lsd_db", "time_domain_rmse"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.phi_mag_err is not None and not (
            np.isfinite(self.phi_mag_err) and self.phi_mag_err >= 0.0
        ):
            raise ValueError(f"phi_mag_err must be finite and >= 0, got {self.phi_mag_err}")

    def to_json(self) -> str:
        return json.dumps(
            {
                "lsd_db": self.lsd_db,
                "time_domain_rmse": self.time_domain_rmse,
                "phi_mag_err": self.phi_mag_err,
            }
        )


def _pad_to(x: np.ndarray, n: int) -> np.ndarray:
    if x.size >= n:
        return x
    return np.concatenate([x, np.zeros(n - x.size)])


def log_spectral_distance(
    a: AudioBuffer, b: AudioBuffer, plan: FramePlan, floor: float = 1e-12
) -> float:
    """Mean over frames of the RMS difference of dB magnitude spectra.

    Frames follow the plan's window and hop; the shorter signal is
    zero-padded to the longer one's length so both are cut identically.
    """
    if a.sample_rate != b.sample_rate:
        raise SampleRateMismatchError(
            f"cannot compare {a.sample_rate} Hz against {b.sample_rate} Hz"
        )
    n = max(len(a), len(b))
    xa = AudioBuffer(samples=_pad_to(a.samples, n), sample_rate=a.sample_rate)
    xb = AudioBuffer(samples=_pad_to(b.samples, n), sample_rate=b.sample_rate)
    per_frame = []
    for fa, fb in zip(frame_signal(xa, plan), frame_signal(xb, plan)):
        spec_a = forward(AudioBuffer(samples=fa, sample_rate=a.sample_rate), plan.n_uniform_frame)
        spec_b = forward(AudioBuffer(samples=fb, sample_rate=b.sample_rate), plan.n_uniform_frame)
        da = 20.0 * np.log10(np.abs(spec_a.bins) + floor)
        db = 20.0 * np.log10(np.abs(spec_b.bins) + floor)
        per_frame.append(float(np.sqrt(np.mean((da - db) ** 2))))
    return float(np.mean(per_frame))


def phi_accuracy(phi: NormalizationVector, h: RoomImpulseResponse) -> float:
    """Mean absolute error of the vector's magnitude part against the true
    log magnitude of the impulse response, over bins where the truth is
    comfortably above the floor."""
    if phi.sample_rate != h.sample_rate:
        raise MetadataMismatchError(
            f"vector at {phi.sample_rate} Hz but impulse response at {h.sample_rate} Hz"
        )
    if len(h) > phi.n_uniform:
        raise MetadataMismatchError(
            f"impulse response of {len(h)} taps exceeds the vector's N={phi.n_uniform}"
        )
    spec = forward(AudioBuffer(samples=h.taps, sample_rate=h.sample_rate), phi.n_uniform)
    truth_mag = np.abs(spec.bins)
    qualifying = truth_mag > 10.0 * phi.epsilon
    truth = np.log(truth_mag[qualifying])
    return float(np.mean(np.abs(phi.delta_log_mag[qualifying] - truth)))


def aligned_rmse(ref: AudioBuffer, est: AudioBuffer, max_lag: int = 0) -> float:
    """RMS error after the best integer lag in [-max_lag, max_lag] and the
    least-squares scalar gain at that lag.

    Both signals are placed in a common zero-padded frame, so the value at
    lag 0 / gain 1 is the plain RMSE over that frame and the search result
    can only be smaller or equal.
    """
    if ref.sample_rate != est.sample_rate:
        raise SampleRateMismatchError(
            f"cannot compare {ref.sample_rate} Hz against {est.sample_rate} Hz"
        )
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    n = max(len(ref), len(est))
    total = n + 2 * max_lag
    r = np.zeros(total)
    r[max_lag : max_lag + len(ref)] = ref.samples
    e_base = np.zeros(total)
    e_base[max_lag : max_lag + len(est)] = est.samples
    rr = float(r @ r)
    ee = float(e_base @ e_base)
    best = None
    for lag in range(-max_lag, max_lag + 1):
        e = np.roll(e_base, lag)
        # roll is safe: the max_lag guard bands are zero
        re = float(r @ e)
        if ee > 0.0:
            sq = rr - re * re / ee
        else:
            sq = rr
        sq = max(sq, 0.0)
        if best is None or sq < best:
            best = sq
    return float(np.sqrt(best / total))
