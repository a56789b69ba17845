import numpy as np
import pytest

from lsnorm.audio_io import AudioBuffer
from lsnorm.errors import SampleRateMismatchError
from lsnorm.rir import RoomImpulseResponse, convolve, decay_envelope, load_rir, save_rir, synth_rir

from oracles import convolve_direct


class TestSynth:
    def test_envelope_hits_minus_60db_at_t60(self):
        # amplitude 1e-3 is a power drop of 60 dB
        env = decay_envelope(t60=0.5, sample_rate=16000, length=9000)
        assert env[8000] == pytest.approx(1e-3, rel=1e-12)

    def test_envelope_for_large_room(self):
        # T60 of 0.7 s at 16 kHz decays to 1e-3 at tap 11200
        env = decay_envelope(t60=0.7, sample_rate=16000, length=16384)
        assert env[11200] == pytest.approx(1e-3, rel=1e-12)

    def test_deterministic(self):
        a = synth_rir(0.3, 16000, seed=7)
        b = synth_rir(0.3, 16000, seed=7)
        assert np.array_equal(a.taps, b.taps)
        c = synth_rir(0.3, 16000, seed=8)
        assert not np.array_equal(a.taps, c.taps)

    def test_direct_path_tap(self):
        r = synth_rir(0.2, 16000, length=4000, direct_delay=10, seed=1)
        assert r.taps[10] == 1.0
        assert np.all(r.taps[:10] == 0.0)

    def test_default_length(self):
        r = synth_rir(0.25, 16000, seed=0)
        assert len(r) == 8000

    @pytest.mark.parametrize("kwargs", [
        dict(t60=0.0, sample_rate=16000),
        dict(t60=-1.0, sample_rate=16000),
        dict(t60=0.5, sample_rate=16000, length=100),   # shorter than the decay
        dict(t60=0.1, sample_rate=16000, length=1700, direct_delay=1700),
        dict(t60=0.1, sample_rate=0),
    ])
    def test_invalid_params(self, kwargs):
        with pytest.raises(ValueError):
            synth_rir(**kwargs)

    def test_tail_energy_bound(self):
        # envelope energy past t60 seconds is at most 1e-6 of the total
        fs, t60 = 16000, 0.1
        env = decay_envelope(t60, fs, length=2 * 1600)
        energy = env**2
        tail = energy[1600:].sum()
        assert tail / energy.sum() <= 1e-6


class TestConvolve:
    def test_identity(self, rng):
        x = rng.standard_normal(50)
        h = RoomImpulseResponse(np.array([1.0]), 16000)
        out = convolve(AudioBuffer(x, 16000), h)
        assert np.max(np.abs(out.samples - x)) <= 1e-12

    def test_hand_arithmetic(self):
        out = convolve(
            AudioBuffer(np.array([1.0, 2.0]), 16000),
            RoomImpulseResponse(np.array([3.0, 4.0]), 16000),
        )
        assert np.max(np.abs(out.samples - [3.0, 10.0, 8.0])) <= 1e-12

    def test_matches_direct_sum(self, rng):
        s = rng.standard_normal(50)
        h = rng.standard_normal(20)
        out = convolve(AudioBuffer(s, 16000), RoomImpulseResponse(h, 16000))
        ref = convolve_direct(s, h)
        assert out.samples.size == 69
        assert np.max(np.abs(out.samples - ref)) <= 1e-10

    def test_linearity(self, rng):
        x = rng.standard_normal(40)
        y = rng.standard_normal(40)
        h = RoomImpulseResponse(rng.standard_normal(10), 16000)
        lhs = convolve(AudioBuffer(2.0 * x + 3.0 * y, 16000), h).samples
        rhs = 2.0 * convolve(AudioBuffer(x, 16000), h).samples + 3.0 * convolve(
            AudioBuffer(y, 16000), h
        ).samples
        assert np.max(np.abs(lhs - rhs)) <= 1e-10

    def test_sample_rate_mismatch(self):
        with pytest.raises(SampleRateMismatchError):
            convolve(
                AudioBuffer(np.ones(4), 16000),
                RoomImpulseResponse(np.ones(2), 8000),
            )


class TestLoadSave:
    def test_round_trip_exact(self, tmp_path):
        r = synth_rir(0.05, 16000, seed=3)
        save_rir(r, tmp_path / "r.wav")
        back = load_rir(tmp_path / "r.wav")
        # synth quantizes to float32, so the float32 file is lossless
        assert np.array_equal(back.taps, r.taps)
        assert back.sample_rate == r.sample_rate
        assert back.t60 is None

    def test_loaded_rir_is_referentially_transparent(self, tmp_path, rng):
        r = synth_rir(0.05, 16000, seed=3)
        save_rir(r, tmp_path / "r.wav")
        x = AudioBuffer(rng.standard_normal(100), 16000)
        once = convolve(x, load_rir(tmp_path / "r.wav")).samples
        again = convolve(x, load_rir(tmp_path / "r.wav")).samples
        in_memory = convolve(x, r).samples
        assert np.array_equal(once, again)
        assert np.array_equal(once, in_memory)

    def test_stereo_rir_rejected(self, tmp_path):
        import struct

        from lsnorm.errors import UnsupportedFormatError

        payload = struct.pack("<4h", 1, 1, 0, 0)
        fmt = b"fmt " + struct.pack("<IHHIIHH", 16, 1, 2, 16000, 64000, 4, 16)
        data = b"data" + struct.pack("<I", len(payload)) + payload
        raw = b"RIFF" + struct.pack("<I", 4 + len(fmt) + len(data)) + b"WAVE" + fmt + data
        (tmp_path / "st.wav").write_bytes(raw)
        with pytest.raises(UnsupportedFormatError):
            load_rir(tmp_path / "st.wav")
