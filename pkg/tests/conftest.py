import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lsnorm.audio_io import AudioBuffer, write_wav


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def wav_dir(tmp_path):
    """Factory writing float32 WAVs into a temp dir, returning their paths."""

    def make(name: str, samples, sample_rate: int = 16000, codec: str = "float32") -> Path:
        path = tmp_path / name
        write_wav(path, AudioBuffer(samples=np.asarray(samples, dtype=np.float64),
                                    sample_rate=sample_rate), codec)
        return path

    return make
