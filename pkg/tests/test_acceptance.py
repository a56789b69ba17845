"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as the
criteria complete. Budgets are asserted alongside the numerical gates.
"""

import contextlib
import io
import json
import math
import time
from dataclasses import dataclass

import numpy as np
import pytest

from lsnorm.audio_io import AudioBuffer, read_wav, write_wav
from lsnorm.cli import main as cli_main
from lsnorm.corpus import CorpusManifest, MeanLogSpectrum, accumulate, corpus_mean, mean, save_manifest
from lsnorm.metrics import log_spectral_distance, phi_accuracy
from lsnorm.normalize import (
    NormalizationVector,
    apply_framed,
    apply_utterance,
    estimate_phi,
    frame_signal,
    load_phi,
    make_frame_plan,
    overlap_add,
    phi_from_rir,
    save_phi,
)
from lsnorm.rir import convolve, synth_rir
from lsnorm.spectral import forward, to_log_spectrum, unwrap_phase
from lsnorm.synth import make_utterance

FS = 16000
TWO_PI = 2.0 * math.pi
N_SWEEP = 65536  # covers 2 s utterances plus 2 s of reverberation headroom


def _report(num: int, name: str, ok: bool, t0: float, budget: float) -> float:
    elapsed = time.monotonic() - t0
    status = "PASS" if ok and elapsed < budget else "FAIL"
    print(f"[ACCEPTANCE] criterion {num} ({name}): {status} "
          f"({elapsed:.1f} s, budget {budget:.0f} s)")
    return elapsed


def test_criterion_1_convolution_theorem(rng):
    t0 = time.monotonic()
    n = 4096
    worst = 0.0
    for _ in range(100):
        la = int(rng.integers(1, 2049))
        lb = int(rng.integers(1, min(2048, n - la + 1) + 1))
        s = AudioBuffer(rng.uniform(-1, 1, la), FS)
        from lsnorm.rir import RoomImpulseResponse

        h = RoomImpulseResponse(rng.uniform(-1, 1, lb), FS)
        conv = convolve(s, h)
        left = forward(conv, n).bins
        right = forward(s, n).bins * forward(AudioBuffer(h.taps, FS), n).bins
        scale = float(np.max(np.abs(right)))
        worst = max(worst, float(np.max(np.abs(left - right))) / scale)
    ok = worst <= 1e-9
    elapsed = _report(1, "convolution theorem", ok, t0, 10.0)
    assert ok, f"worst relative deviation {worst:.3e}"
    assert elapsed < 10.0


def test_criterion_2_exact_deconvolution(rng):
    t0 = time.monotonic()
    n = 4096
    worst = 0.0
    for case in range(50):
        len_h = int(rng.integers(2, n // 2 + 1))  # up to 0.5 * N taps
        h = synth_rir(
            t60=len_h / (2.0 * FS), sample_rate=FS, length=len_h, seed=9000 + case
        )
        len_s = int(rng.integers(50, n - len_h + 2))
        s = AudioBuffer(rng.uniform(-0.5, 0.5, len_s), FS)
        o = convolve(s, h)
        out = apply_utterance(o, phi_from_rir(h, n))
        err = max(
            float(np.max(np.abs(out.samples[:len_s] - s.samples))),
            float(np.max(np.abs(out.samples[len_s:]))),
        )
        worst = max(worst, err)
    ok = worst <= 1e-6
    elapsed = _report(2, "exact deconvolution", ok, t0, 30.0)
    assert ok, f"worst recovery error {worst:.3e}"
    assert elapsed < 30.0


def test_criterion_3_phase_unwrap(rng):
    t0 = time.monotonic()
    ok = True
    # (a)-(c) on random finite sequences
    for _ in range(50):
        p = rng.uniform(-50.0, 50.0, size=int(rng.integers(2, 513)))
        out = unwrap_phase(p)
        d = np.diff(out)
        ok &= bool(np.all(np.abs(d) <= math.pi))
        turns = (out - p) / TWO_PI
        ok &= float(np.max(np.abs(turns - np.round(turns)))) * TWO_PI <= 1e-12
        ok &= bool(np.array_equal(unwrap_phase(out), out))
    # (d) linear ramps: wrapped ramps come back as exact lines; slopes above
    # pi alias to the equivalent slope in (-pi, pi)
    k = np.arange(256, dtype=np.float64)
    worst = 0.0
    for _ in range(100):
        omega = float(rng.uniform(1e-6, 1.9 * math.pi))
        wrapped = np.mod(omega * k, TWO_PI)
        out = unwrap_phase(wrapped)
        slope = omega if omega <= math.pi else omega - TWO_PI
        worst = max(worst, float(np.max(np.abs(out - slope * k))))
    ok &= worst <= 1e-9
    elapsed = _report(3, "phase unwrap", ok, t0, 5.0)
    assert ok, f"worst ramp deviation {worst:.3e}"
    assert elapsed < 5.0


@dataclass
class SweepResult:
    errs_by_seed: list
    build_seconds: float
    h0: object
    clean0: list
    clean_acc0: MeanLogSpectrum
    reverb_acc0: MeanLogSpectrum


@pytest.fixture(scope="session")
def sweep() -> SweepResult:
    """Criterion-4 setup: 5 seeds of 200 synthetic utterances, one room each.

    The reverberant corpus grows through {10, 50, 200} utterances while the
    clean corpus stays at its full size, mirroring a sweep over the amount
    of reverberated data.
    """
    t0 = time.monotonic()
    errs_by_seed = []
    keep = {}
    for seed in range(5):
        rng = np.random.default_rng(1000 + seed)
        h = synth_rir(t60=0.1, sample_rate=FS, length=3200, seed=seed)
        clean = [make_utterance(rng, FS, 1.0, 2.0) for _ in range(200)]
        clean_acc = MeanLogSpectrum(n_uniform=N_SWEEP, sample_rate=FS)
        for s in clean:
            accumulate(clean_acc, to_log_spectrum(forward(s, N_SWEEP)))
        errs = {}
        reverb_acc = MeanLogSpectrum(n_uniform=N_SWEEP, sample_rate=FS)
        for i, s in enumerate(clean):
            accumulate(reverb_acc, to_log_spectrum(forward(convolve(s, h), N_SWEEP)))
            if i + 1 in (10, 50, 200):
                errs[i + 1] = phi_accuracy(estimate_phi(reverb_acc, clean_acc), h)
        errs_by_seed.append(errs)
        if seed == 0:
            keep = dict(h0=h, clean0=clean, clean_acc0=clean_acc, reverb_acc0=reverb_acc)
    return SweepResult(
        errs_by_seed=errs_by_seed, build_seconds=time.monotonic() - t0, **keep
    )


def test_criterion_4_phi_estimation_sweep(sweep):
    t0 = time.monotonic() - sweep.build_seconds  # the shared setup counts here
    med = {
        size: float(np.median([e[size] for e in sweep.errs_by_seed]))
        for size in (10, 50, 200)
    }
    ok = med[10] > med[50] > med[200]
    elapsed = _report(4, "corpus-size sweep", ok, t0, 300.0)
    print(f"             median vector error by corpus size: {med}")
    assert ok, med
    assert elapsed < 300.0


@pytest.fixture(scope="session")
def held_out(sweep):
    """20 held-out utterances reverberated with the seed-0 room."""
    rng = np.random.default_rng(2000)
    clean = [make_utterance(rng, FS, 1.8, 2.0) for _ in range(20)]
    return [(s, convolve(s, sweep.h0)) for s in clean]


def test_criterion_5_dereverberation_improves_spectra(sweep, held_out):
    t0 = time.monotonic()
    phi = estimate_phi(sweep.reverb_acc0, sweep.clean_acc0)
    plan = make_frame_plan(FS, 0.032, 0.5)
    wins = 0
    for s, o in held_out:
        derev = apply_utterance(o, phi)
        L = len(s)
        lsd_d = log_spectral_distance(s, AudioBuffer(derev.samples[:L], FS), plan)
        lsd_r = log_spectral_distance(s, AudioBuffer(o.samples[:L], FS), plan)
        if lsd_d < lsd_r:
            wins += 1
    ok = wins / len(held_out) >= 0.95
    elapsed = _report(5, "utterance-wise improvement", ok, t0, 120.0)
    print(f"             {wins}/{len(held_out)} utterances improved")
    assert ok, f"only {wins}/{len(held_out)} improved"
    assert elapsed < 120.0


def test_criterion_6_framewise_vs_utterancewise_ordering(sweep, held_out):
    t0 = time.monotonic()
    plan = make_frame_plan(FS)  # 1.5 s frames, N 32768
    assert plan.frame_len >= 2 * len(sweep.h0)  # validity precondition
    phi_utt = estimate_phi(sweep.reverb_acc0, sweep.clean_acc0)

    reverb_f = MeanLogSpectrum(n_uniform=plan.n_uniform_frame, sample_rate=FS)
    clean_f = MeanLogSpectrum(n_uniform=plan.n_uniform_frame, sample_rate=FS)
    for s in sweep.clean0:
        for seg in frame_signal(convolve(s, sweep.h0), plan):
            if np.any(seg):
                accumulate(reverb_f, to_log_spectrum(forward(AudioBuffer(seg, FS), plan.n_uniform_frame)))
        for seg in frame_signal(s, plan):
            if np.any(seg):
                accumulate(clean_f, to_log_spectrum(forward(AudioBuffer(seg, FS), plan.n_uniform_frame)))
    phi_frame = estimate_phi(reverb_f, clean_f)

    lsd_plan = make_frame_plan(FS, 0.032, 0.5)
    m_utt, m_frm, m_raw = [], [], []
    for s, o in held_out:
        derev_u = apply_utterance(o, phi_utt)
        frames = apply_framed(o, phi_frame, plan)
        recon = overlap_add(frames, plan)
        # score the interior where overlap-add has full window coverage
        lo = plan.hop
        hi = min(len(s), (len(frames) - 1) * plan.hop)
        ref = AudioBuffer(s.samples[lo:hi], FS)
        m_utt.append(log_spectral_distance(ref, AudioBuffer(derev_u.samples[lo:hi], FS), lsd_plan))
        m_frm.append(log_spectral_distance(ref, AudioBuffer(recon.samples[lo:hi], FS), lsd_plan))
        m_raw.append(log_spectral_distance(ref, AudioBuffer(o.samples[lo:hi], FS), lsd_plan))
    utt, frm, raw = float(np.mean(m_utt)), float(np.mean(m_frm)), float(np.mean(m_raw))
    ok = utt <= frm < raw
    elapsed = _report(6, "utterance <= framed < raw", ok, t0, 180.0)
    print(f"             mean LSD: utterance {utt:.2f} dB, framed {frm:.2f} dB, "
          f"unprocessed {raw:.2f} dB")
    assert ok, (utt, frm, raw)
    assert elapsed < 180.0


def test_criterion_7_self_normalization(tmp_path, rng):
    t0 = time.monotonic()
    names = []
    for i in range(5):
        write_wav(tmp_path / f"u{i}.wav", make_utterance(rng, FS, 0.2, 0.4), "float32")
        names.append(f"u{i}.wav")
    save_manifest(CorpusManifest(files=names, sample_rate=FS), tmp_path / "m.json")
    from lsnorm.corpus import load_manifest

    manifest = load_manifest(tmp_path / "m.json")
    n = 16384
    phi = estimate_phi(corpus_mean(manifest, n), corpus_mean(manifest, n))
    ok = bool(np.all(phi.delta_log_mag == 0.0) and np.all(phi.delta_phase == 0.0))
    x = read_wav(manifest.files[0])
    out = apply_utterance(x, phi)
    ident = float(
        max(np.max(np.abs(out.samples[: len(x)] - x.samples)), np.max(np.abs(out.samples[len(x):])))
    )
    ok &= ident <= 1e-10
    elapsed = _report(7, "self-normalization", ok, t0, 60.0)
    assert ok, f"identity error {ident:.3e}"
    assert elapsed < 60.0


def test_criterion_8_format_round_trips(tmp_path, rng):
    t0 = time.monotonic()
    # normalization-vector file
    n = 32768
    bins = n // 2 + 1
    phi = NormalizationVector(
        delta_log_mag=rng.standard_normal(bins),
        delta_phase=rng.standard_normal(bins) * 30,
        n_uniform=n,
        sample_rate=FS,
        epsilon=1e-12,
        reverb_count=11,
        clean_count=13,
    )
    save_phi(phi, tmp_path / "p.phi")
    back = load_phi(tmp_path / "p.phi")
    ok = bool(
        np.array_equal(back.delta_log_mag, phi.delta_log_mag)
        and np.array_equal(back.delta_phase, phi.delta_phase)
        and (back.n_uniform, back.sample_rate, back.epsilon) == (n, FS, 1e-12)
        and (back.reverb_count, back.clean_count) == (11, 13)
    )
    # float32 WAV
    x = rng.uniform(-1, 1, 20000).astype(np.float32).astype(np.float64)
    write_wav(tmp_path / "x.wav", AudioBuffer(x, FS), "float32")
    ok &= bool(np.array_equal(read_wav(tmp_path / "x.wav").samples, x))
    # sequential vs parallel corpus mean
    names = []
    for i in range(16):
        write_wav(tmp_path / f"c{i}.wav", make_utterance(rng, FS, 0.2, 0.4), "float32")
        names.append(f"c{i}.wav")
    save_manifest(CorpusManifest(files=names, sample_rate=FS), tmp_path / "cm.json")
    from lsnorm.corpus import load_manifest

    manifest = load_manifest(tmp_path / "cm.json")
    seq = corpus_mean(manifest, 16384, jobs=1)
    par = corpus_mean(manifest, 16384, jobs=4)
    gap = max(
        float(np.max(np.abs(mean(seq).log_mag - mean(par).log_mag))),
        float(np.max(np.abs(mean(seq).phase - mean(par).phase))),
    )
    ok &= gap <= 1e-9
    elapsed = _report(8, "format round trips", ok, t0, 60.0)
    assert ok, f"parallel/sequential gap {gap:.3e}"
    assert elapsed < 60.0


def test_criterion_9_end_to_end_cli(tmp_path):
    t0 = time.monotonic()
    rng = np.random.default_rng(99)
    clean_dir = tmp_path / "clean"
    clean_dir.mkdir()
    names = []
    for i in range(20):
        write_wav(clean_dir / f"utt{i:02d}.wav", make_utterance(rng, FS, 0.5, 1.0), "float32")
        names.append(f"utt{i:02d}.wav")
    save_manifest(CorpusManifest(files=names, sample_rate=FS), clean_dir / "manifest.json")

    def run(*argv) -> None:
        with contextlib.redirect_stdout(io.StringIO()):
            code = cli_main([str(a) for a in argv])
        assert code == 0, f"command failed: {argv}"

    def lsd_of(ref, est) -> float:
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = cli_main([str(a) for a in (
                "evaluate", "--ref", ref, "--est", est, "--crop-to-ref", "--max-lag", 64,
            )])
        assert code == 0
        doc = json.loads(buf.getvalue().strip().splitlines()[-1])
        assert set(doc) == {"lsd_db", "time_domain_rmse", "phi_mag_err"}
        return doc["lsd_db"]

    run("synth-rir", "--t60", 0.1, "--fs", FS, "--len", 3200, "--seed", 0,
        "--out", tmp_path / "rir.wav")
    run("convolve", "--rir", tmp_path / "rir.wav",
        "--manifest", clean_dir / "manifest.json", "--out-dir", tmp_path / "wet")
    run("estimate", "--reverb-manifest", tmp_path / "wet" / "manifest.json",
        "--clean-manifest", clean_dir / "manifest.json",
        "--out", tmp_path / "phi.bin", "--jobs", 4)
    derev_dir = tmp_path / "derev"
    derev_dir.mkdir()
    wins = 0
    for i in range(20):
        wet = tmp_path / "wet" / f"utt{i:02d}.wav"
        out = derev_dir / f"utt{i:02d}.wav"
        run("apply", "--phi", tmp_path / "phi.bin", "--in", wet, "--out", out)
        ref = clean_dir / f"utt{i:02d}.wav"
        if lsd_of(ref, out) < lsd_of(ref, wet):
            wins += 1
    ok = wins / 20 >= 0.95
    elapsed = _report(9, "end-to-end CLI pipeline", ok, t0, 180.0)
    print(f"             {wins}/20 utterances improved")
    assert ok, f"only {wins}/20 improved"
    assert elapsed < 180.0
