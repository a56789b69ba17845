"""Manifest-driven corpora and streaming mean log spectra.

A corpus is a JSON manifest listing WAV files at one declared sample rate.
Analysis folds each utterance's log spectrum into a running sum; the mean
of those sums is what the normalization vector is built from. Per-file
analysis is embarrassingly parallel, so the fold can be split into
contiguous chunks whose partial accumulators are merged in manifest order,
keeping the result independent of the degree of parallelism up to
floating-point reassociation.
"""

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio_io import read_wav
from .errors import EmptyAccumulatorError, MetadataMismatchError, SampleRateMismatchError, TooLongError
from .spectral import DEFAULT_EPSILON, LogSpectrum, forward, to_log_spectrum


@dataclass
class CorpusManifest:
    """Ordered list of audio files sharing one sample rate."""

    files: list[Path]
    sample_rate: int

    def __post_init__(self):
        self.files = [Path(f) for f in self.files]
        if not self.files:
            raise ValueError("manifest lists no files")
        seen = set()
        for f in self.files:
            if f in seen:
                raise ValueError(f"duplicate path in manifest: {f}")
            seen.add(f)
        if int(self.sample_rate) <= 0:
            raise ValueError("sample_rate must be positive")
        self.sample_rate = int(self.sample_rate)

    def digest(self) -> str:
        """Short stable fingerprint of the file list and sample rate."""
        h = hashlib.sha256()
        h.update(str(self.sample_rate).encode())
        for f in self.files:
            h.update(b"\0" + str(f).encode())
        return h.hexdigest()[:16]


def load_manifest(path) -> CorpusManifest:
    """Read a manifest JSON file: {"sample_rate": int, "files": [...]}.

    Relative entries resolve against the manifest's own directory.
    """
    path = Path(path)
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "sample_rate" not in doc or "files" not in doc:
        raise ValueError(f"{path}: manifest must be an object with sample_rate and files")
    base = path.parent
    files = [base / f if not Path(f).is_absolute() else Path(f) for f in doc["files"]]
    return CorpusManifest(files=files, sample_rate=int(doc["sample_rate"]))


def save_manifest(manifest: CorpusManifest, path) -> None:
    path = Path(path)
    doc = {"sample_rate": manifest.sample_rate, "files": [str(f) for f in manifest.files]}
    path.write_text(json.dumps(doc, indent=2) + "\n")


@dataclass
class MeanLogSpectrum:
    """Running per-bin sums of log magnitude and unwrapped phase."""

    n_uniform: int
    sample_rate: int
    epsilon: float = DEFAULT_EPSILON
    count: int = 0
    sum_log_mag: np.ndarray = field(default=None, repr=False)
    sum_phase: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        n_bins = self.n_uniform // 2 + 1
        if self.sum_log_mag is None:
            self.sum_log_mag = np.zeros(n_bins, dtype=np.float64)
        if self.sum_phase is None:
            self.sum_phase = np.zeros(n_bins, dtype=np.float64)
        if self.sum_log_mag.shape != (n_bins,) or self.sum_phase.shape != (n_bins,):
            raise ValueError(f"accumulator vectors must have length {n_bins}")
        if self.count < 0:
            raise ValueError("count must be >= 0")


def _check_meta(acc: MeanLogSpectrum, n_uniform: int, sample_rate: int, epsilon: float) -> None:
    if acc.n_uniform != n_uniform or acc.sample_rate != sample_rate or acc.epsilon != epsilon:
        raise MetadataMismatchError(
            f"accumulator (N={acc.n_uniform}, fs={acc.sample_rate}, eps={acc.epsilon}) "
            f"vs operand (N={n_uniform}, fs={sample_rate}, eps={epsilon})"
        )


def accumulate(acc: MeanLogSpectrum, ls: LogSpectrum) -> MeanLogSpectrum:
    """Fold one utterance's log spectrum into the accumulator (in place)."""
    _check_meta(acc, ls.n_uniform, ls.sample_rate, ls.epsilon)
    acc.sum_log_mag += ls.log_mag
    acc.sum_phase += ls.phase
    acc.count += 1
    return acc


def merge(a: MeanLogSpectrum, b: MeanLogSpectrum) -> MeanLogSpectrum:
    """Combine two partial accumulators into a new one."""
    _check_meta(a, b.n_uniform, b.sample_rate, b.epsilon)
    return MeanLogSpectrum(
        n_uniform=a.n_uniform,
        sample_rate=a.sample_rate,
        epsilon=a.epsilon,
        count=a.count + b.count,
        sum_log_mag=a.sum_log_mag + b.sum_log_mag,
        sum_phase=a.sum_phase + b.sum_phase,
    )


def mean(acc: MeanLogSpectrum) -> LogSpectrum:
    """Per-bin means. Phase is a mean of already-unwrapped values, not re-wrapped."""
    if acc.count < 1:
        raise EmptyAccumulatorError("no utterances accumulated")
    return LogSpectrum(
        log_mag=acc.sum_log_mag / acc.count,
        phase=acc.sum_phase / acc.count,
        n_uniform=acc.n_uniform,
        sample_rate=acc.sample_rate,
        epsilon=acc.epsilon,
    )


def analyze_file(path, n_uniform: int, sample_rate: int, epsilon: float) -> LogSpectrum:
    """Read one utterance and compute its log spectrum at the run's N."""
    buf = read_wav(path)
    if buf.sample_rate != sample_rate:
        raise SampleRateMismatchError(
            f"{path}: file at {buf.sample_rate} Hz but manifest declares {sample_rate} Hz"
        )
    if len(buf) > n_uniform:
        raise TooLongError(
            f"{path}: {len(buf)} samples exceed transform length {n_uniform}"
        )
    return to_log_spectrum(forward(buf, n_uniform), epsilon)


def corpus_mean(
    manifest: CorpusManifest,
    n_uniform: int,
    epsilon: float = DEFAULT_EPSILON,
    jobs: int = 1,
) -> MeanLogSpectrum:
    """Mean log spectrum over every file in the manifest.

    With jobs > 1 the file list is split into contiguous chunks processed
    concurrently; chunk accumulators are merged in manifest order, so the
    result differs from the sequential fold only by sum reassociation.
    """
    files = manifest.files
    fs = manifest.sample_rate

    def fold(chunk) -> MeanLogSpectrum:
        acc = MeanLogSpectrum(n_uniform=n_uniform, sample_rate=fs, epsilon=epsilon)
        for f in chunk:
            accumulate(acc, analyze_file(f, n_uniform, fs, epsilon))
        return acc

    jobs = max(1, int(jobs))
    if jobs == 1 or len(files) == 1:
        return fold(files)
    jobs = min(jobs, len(files))
    bounds = np.linspace(0, len(files), jobs + 1).astype(int)
    chunks = [files[a:b] for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(fold, chunks))
    acc = parts[0]
    for part in parts[1:]:
        acc = merge(acc, part)
    return acc


def longest_file(manifest: CorpusManifest) -> tuple[Path, int]:
    """Path and length in samples of the longest utterance in the manifest."""
    best: tuple[Path, int] | None = None
    for f in manifest.files:
        buf = read_wav(f)
        if buf.sample_rate != manifest.sample_rate:
            raise SampleRateMismatchError(
                f"{f}: file at {buf.sample_rate} Hz but manifest declares "
                f"{manifest.sample_rate} Hz"
            )
        if best is None or len(buf) > best[1]:
            best = (f, len(buf))
    assert best is not None
    return best
