"""Command-line pipeline: synth-rir, convolve, estimate, apply, apply-framed, evaluate.

Exit codes: 0 success, 1 runtime/IO failure, 2 usage or validation error.
Every command is deterministic given its flags and input bytes, and output
files are written atomically.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import corpus as corpus_mod
from . import metrics as metrics_mod
from . import normalize as norm_mod
from . import rir as rir_mod
from .audio_io import AudioBuffer, read_wav, trim_tail, write_wav
from .errors import (
    BadMagicError,
    CorruptHeaderError,
    EmptyAccumulatorError,
    LengthMismatchError,
    MetadataMismatchError,
    SampleRateMismatchError,
    SymmetryViolationError,
    TooLongError,
    UnsupportedFormatError,
    VersionUnsupportedError,
)

logger = logging.getLogger("lsnorm")

_VALIDATION_ERRORS = (
    ValueError,
    TooLongError,
    MetadataMismatchError,
    SampleRateMismatchError,
    EmptyAccumulatorError,
    LengthMismatchError,
)
_RUNTIME_ERRORS = (
    OSError,
    CorruptHeaderError,
    UnsupportedFormatError,
    BadMagicError,
    VersionUnsupportedError,
    SymmetryViolationError,
    OverflowError,
)


def cmd_synth_rir(args) -> int:
    rir = rir_mod.synth_rir(
        t60=args.t60,
        sample_rate=args.fs,
        length=args.len,
        direct_delay=args.delay,
        seed=args.seed,
    )
    rir_mod.save_rir(rir, args.out)
    sidecar = {"t60": args.t60, "seed": args.seed, "direct_delay": args.delay}
    Path(str(args.out) + ".json").write_text(json.dumps(sidecar) + "\n")
    print(f"wrote {args.out}: t60={args.t60} s, {len(rir)} taps at {args.fs} Hz")
    return 0


def cmd_convolve(args) -> int:
    manifest = corpus_mod.load_manifest(args.manifest)
    h = rir_mod.load_rir(args.rir)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_files = []
    failures = []
    used = set()
    for i, path in enumerate(manifest.files):
        name = Path(path).name
        if name in used:
            name = f"{i:04d}_{name}"
        used.add(name)
        target = out_dir / name
        try:
            wet = rir_mod.convolve(read_wav(path), h)
            write_wav(target, wet, "float32")
            out_files.append(name)
        except Exception as exc:  # per-file isolation: report all failures at once
            failures.append((path, exc))
    if out_files:
        out_manifest = corpus_mod.CorpusManifest(
            files=out_files, sample_rate=manifest.sample_rate
        )
        corpus_mod.save_manifest(out_manifest, out_dir / "manifest.json")
    print(f"convolved {len(out_files)}/{len(manifest.files)} files into {out_dir}")
    if failures:
        print("failed files:", file=sys.stderr)
        for path, exc in failures:
            print(f"  {path}: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_estimate(args) -> int:
    t0 = time.monotonic()
    reverb_manifest = corpus_mod.load_manifest(args.reverb_manifest)
    clean_manifest = corpus_mod.load_manifest(args.clean_manifest)
    if reverb_manifest.sample_rate != clean_manifest.sample_rate:
        raise MetadataMismatchError(
            f"manifests declare different sample rates: "
            f"{reverb_manifest.sample_rate} vs {clean_manifest.sample_rate}"
        )
    fs = reverb_manifest.sample_rate
    if args.frame_scale:
        plan = norm_mod.make_frame_plan(
            fs, args.frame_sec, args.overlap, n_uniform_frame=args.n_uniform
        )
        n_uniform = plan.n_uniform_frame
        reverb_acc = norm_mod.corpus_mean_framed(reverb_manifest, plan, args.epsilon)
        clean_acc = norm_mod.corpus_mean_framed(clean_manifest, plan, args.epsilon)
    else:
        longest = 0
        longest_path = None
        for m in (reverb_manifest, clean_manifest):
            path, n = corpus_mod.longest_file(m)
            if n > longest:
                longest, longest_path = n, path
        if args.n_uniform is not None:
            if args.n_uniform < longest:
                raise TooLongError(
                    f"{longest_path}: {longest} samples exceed requested "
                    f"transform length {args.n_uniform}"
                )
            n_uniform = args.n_uniform
        else:
            n_uniform = norm_mod.choose_n_uniform(longest, fs, args.headroom_sec)
        reverb_acc = corpus_mod.corpus_mean(reverb_manifest, n_uniform, args.epsilon, args.jobs)
        clean_acc = corpus_mod.corpus_mean(clean_manifest, n_uniform, args.epsilon, args.jobs)
    phi = norm_mod.estimate_phi(reverb_acc, clean_acc)
    phi.reverb_digest = reverb_manifest.digest()
    phi.clean_digest = clean_manifest.digest()
    norm_mod.save_phi(phi, args.out)
    elapsed = time.monotonic() - t0
    print(
        f"wrote {args.out}: N={n_uniform}, reverb_count={phi.reverb_count}, "
        f"clean_count={phi.clean_count}, sources={phi.reverb_digest}/{phi.clean_digest}, "
        f"elapsed={elapsed:.1f} s"
    )
    return 0


def cmd_apply(args) -> int:
    phi = norm_mod.load_phi(args.phi)
    o = read_wav(args.infile)
    out = norm_mod.apply_utterance(o, phi)
    if args.trim:
        out = trim_tail(out)
    write_wav(args.out, out, "float32")
    print(f"wrote {args.out}: {len(out)} samples")
    return 0


def cmd_apply_framed(args) -> int:
    phi = norm_mod.load_phi(args.phi)
    plan = norm_mod.make_frame_plan(phi.sample_rate, args.frame_sec, args.overlap)
    if plan.n_uniform_frame != phi.n_uniform:
        raise MetadataMismatchError(
            f"vector was estimated at N={phi.n_uniform} but {args.frame_sec} s frames "
            f"at {phi.sample_rate} Hz use N={plan.n_uniform_frame}; estimate the vector "
            "with --frame-scale and matching frame settings"
        )
    o = read_wav(args.infile)
    frames = norm_mod.apply_framed(o, phi, plan)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for m, frame in enumerate(frames):
        write_wav(out_dir / f"frame_{m:05d}.wav", frame, "float32")
    if args.reconstruct:
        recon = norm_mod.overlap_add(frames, plan)
        write_wav(out_dir / "reconstructed.wav", recon, "float32")
    print(f"wrote {len(frames)} frames to {out_dir}")
    return 0


def cmd_evaluate(args) -> int:
    ref = read_wav(args.ref)
    est = read_wav(args.est)
    if args.crop_to_ref and len(est) > len(ref):
        est = AudioBuffer(samples=est.samples[: len(ref)].copy(), sample_rate=est.sample_rate)
    plan = norm_mod.make_frame_plan(ref.sample_rate, args.lsd_frame_sec, 0.5)
    lsd = metrics_mod.log_spectral_distance(ref, est, plan)
    rmse = metrics_mod.aligned_rmse(ref, est, args.max_lag)
    phi_err = None
    if (args.phi is None) != (args.rir is None):
        raise ValueError("--phi and --rir must be given together")
    if args.phi is not None:
        phi = norm_mod.load_phi(args.phi)
        h = rir_mod.load_rir(args.rir)
        phi_err = metrics_mod.phi_accuracy(phi, h)
    report = metrics_mod.EvalReport(lsd_db=lsd, time_domain_rmse=rmse, phi_mag_err=phi_err)
    text = report.to_json()
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lsnorm",
        description="Blind dereverberation by long-window log-spectrum normalization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-rir", help="generate a synthetic room impulse response")
    p.add_argument("--t60", type=float, required=True, help="decay time to -60 dB, seconds")
    p.add_argument("--fs", type=int, required=True, help="sample rate, Hz")
    p.add_argument("--len", type=int, default=None, help="taps (default 2*t60*fs)")
    p.add_argument("--delay", type=int, default=0, help="direct-path delay, samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output WAV path")
    p.set_defaults(func=cmd_synth_rir)

    p = sub.add_parser("convolve", help="convolve every manifest file with one RIR")
    p.add_argument("--rir", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("estimate", help="estimate a normalization vector from two corpora")
    p.add_argument("--reverb-manifest", required=True)
    p.add_argument("--clean-manifest", required=True)
    p.add_argument("--out", required=True, help="output vector file")
    p.add_argument("--n-uniform", type=int, default=None, help="override transform length")
    p.add_argument("--epsilon", type=float, default=1e-12, help="magnitude floor")
    p.add_argument("--frame-scale", action="store_true", help="estimate over windowed frames")
    p.add_argument("--frame-sec", type=float, default=1.5)
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument("--headroom-sec", type=float, default=2.0, help="reverberation headroom")
    p.add_argument("--jobs", type=int, default=1, help="parallel corpus analysis")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("apply", help="normalize one utterance")
    p.add_argument("--phi", required=True, help="normalization vector file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trim", action="store_true", help="drop the trailing silence below -80 dBFS")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("apply-framed", help="normalize 1.5 s frames of one utterance")
    p.add_argument("--phi", required=True, help="frame-scale normalization vector file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--frame-sec", type=float, default=1.5)
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument("--reconstruct", action="store_true", help="also overlap-add a waveform")
    p.set_defaults(func=cmd_apply_framed)

    p = sub.add_parser("evaluate", help="compare an estimate against a reference")
    p.add_argument("--ref", required=True)
    p.add_argument("--est", required=True)
    p.add_argument("--phi", default=None, help="vector file, for accuracy vs --rir")
    p.add_argument("--rir", default=None, help="ground-truth impulse response WAV")
    p.add_argument("--out", default=None, help="also write the JSON report here")
    p.add_argument("--max-lag", type=int, default=1600)
    p.add_argument("--lsd-frame-sec", type=float, default=0.032)
    p.add_argument(
        "--crop-to-ref",
        action="store_true",
        help="score the estimate over the reference's duration only; otherwise "
        "the shorter signal is zero-padded, which punishes any residual in "
        "frames where the reference is digital silence",
    )
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
