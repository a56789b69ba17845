"""Mono WAV input/output.

Only the two codecs the pipeline needs are supported: PCM16 little-endian
and IEEE float32, always single channel. Multichannel files are rejected
rather than downmixed, since silent downmixing would corrupt the phase
statistics the rest of the toolkit depends on.

All samples are held as float64 in memory; PCM16 is normalized by 32768 so
the negative range is symmetric. Writes go through a temp file plus rename
so partially written outputs are never observed.
"""

import logging
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorruptHeaderError, UnsupportedFormatError

logger = logging.getLogger(__name__)

PCM16_FULL_SCALE = 32768.0

_FMT_PCM = 1
_FMT_IEEE_FLOAT = 3


@dataclass
class AudioBuffer:
    """A mono sampled waveform.

    samples: real amplitudes, nominal range [-1, 1], stored as float64.
    sample_rate: sampling frequency in Hz.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size < 1:
            raise ValueError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples contain NaN or Inf")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        self.sample_rate = int(self.sample_rate)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def _parse_riff_chunks(raw: bytes, path):
    """Walk the RIFF chunk list, returning (fmt_fields, data_payload)."""
    if len(raw) < 12 or raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise CorruptHeaderError(f"{path}: not a RIFF/WAVE file")
    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        cid = raw[pos : pos + 4]
        (size,) = struct.unpack("<I", raw[pos + 4 : pos + 8])
        body = raw[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise CorruptHeaderError(f"{path}: chunk {cid!r} truncated")
        if cid == b"fmt ":
            if size < 16:
                raise CorruptHeaderError(f"{path}: fmt chunk too short")
            fmt = struct.unpack("<HHIIHH", body[:16])
        elif cid == b"data":
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None or data is None:
        raise CorruptHeaderError(f"{path}: missing fmt or data chunk")
    return fmt, data


def read_wav(path) -> AudioBuffer:
    """Read a mono WAV file.

    PCM16 samples are scaled to [-1, 1) by dividing by 32768; float32
    samples are passed through unchanged.

    Raises FileNotFoundError for missing paths, CorruptHeaderError for
    files that do not parse as WAV, and UnsupportedFormatError for any
    codec/channel layout other than mono PCM16 or mono float32.
    """
    raw = Path(path).read_bytes()
    (audio_format, channels, sample_rate, _byte_rate, _block_align, bits), data = (
        _parse_riff_chunks(raw, path)
    )
    if channels != 1:
        raise UnsupportedFormatError(f"{path}: expected mono, got {channels} channels")
    if audio_format == _FMT_PCM and bits == 16:
        if len(data) % 2:
            raise CorruptHeaderError(f"{path}: PCM16 data size is odd")
        codes = np.frombuffer(data, dtype="<i2")
        samples = codes.astype(np.float64) / PCM16_FULL_SCALE
    elif audio_format == _FMT_IEEE_FLOAT and bits == 32:
        if len(data) % 4:
            raise CorruptHeaderError(f"{path}: float32 data size not a multiple of 4")
        samples = np.frombuffer(data, dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedFormatError(
            f"{path}: unsupported codec (format={audio_format}, bits={bits}); "
            "only PCM16 and IEEE float32 are handled"
        )
    if samples.size == 0:
        raise UnsupportedFormatError(f"{path}: file contains no samples")
    if not np.all(np.isfinite(samples)):
        raise CorruptHeaderError(f"{path}: data contains non-finite values")
    return AudioBuffer(samples=samples, sample_rate=int(sample_rate))


def _wav_bytes(buf: AudioBuffer, codec: str) -> tuple[bytes, int]:
    """Serialize to WAV container bytes; returns (bytes, clipped_count)."""
    clipped = 0
    if codec == "pcm16":
        x = buf.samples
        clipped = int(np.count_nonzero((x < -1.0) | (x >= 1.0)))
        codes = np.clip(np.rint(x * PCM16_FULL_SCALE), -32768, 32767).astype("<i2")
        payload = codes.tobytes()
        audio_format, bits = _FMT_PCM, 16
    elif codec == "float32":
        payload = buf.samples.astype("<f4").tobytes()
        audio_format, bits = _FMT_IEEE_FLOAT, 32
    else:
        raise ValueError(f"unknown codec {codec!r}; use 'pcm16' or 'float32'")

    block_align = bits // 8
    byte_rate = buf.sample_rate * block_align
    fmt_chunk = b"fmt " + struct.pack(
        "<IHHIIHH", 16, audio_format, 1, buf.sample_rate, byte_rate, block_align, bits
    )
    chunks = fmt_chunk
    if audio_format != _FMT_PCM:
        # non-PCM WAVE requires a fact chunk with the sample count
        chunks += b"fact" + struct.pack("<II", 4, buf.samples.size)
    chunks += b"data" + struct.pack("<I", len(payload)) + payload
    riff = b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks
    return riff, clipped


def write_wav(path, buf: AudioBuffer, codec: str = "float32") -> None:
    """Write a mono WAV file atomically (temp file + rename).

    codec 'float32' round-trips bit-exactly at float32 precision; 'pcm16'
    quantizes (max error 1/32768 per sample) and saturates values outside
    [-1, 1), logging a warning with the clipped-sample count.
    """
    raw, clipped = _wav_bytes(buf, codec)
    if clipped:
        logger.warning("%s: clipped %d samples outside [-1, 1)", path, clipped)
    atomic_write_bytes(path, raw)


def atomic_write_bytes(path, raw: bytes) -> None:
    """Write bytes to path via a same-directory temp file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def trim_tail(buf: AudioBuffer, threshold_db: float = -80.0) -> AudioBuffer:
    """Drop trailing samples below a dBFS threshold (keeps at least one)."""
    threshold = 10.0 ** (threshold_db / 20.0)
    above = np.nonzero(np.abs(buf.samples) >= threshold)[0]
    end = int(above[-1]) + 1 if above.size else 1
    return AudioBuffer(samples=buf.samples[:end].copy(), sample_rate=buf.sample_rate)
