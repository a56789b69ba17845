#!/usr/bin/env python3
"""How much reverberant data does the estimate need?

Builds synthetic matched corpora, grows the reverberant side through a
ladder of sizes while the clean side stays fixed, and reports the mean
absolute error of the vector's magnitude part against the known room.
Prints one row per corpus size, medians over several seeds.
"""

import argparse
from dataclasses import dataclass

import numpy as np

from lsnorm.corpus import MeanLogSpectrum, accumulate
from lsnorm.metrics import phi_accuracy
from lsnorm.normalize import estimate_phi
from lsnorm.rir import convolve, synth_rir
from lsnorm.spectral import forward, to_log_spectrum
from lsnorm.synth import make_utterance


@dataclass
class SweepConfig:
    sample_rate: int = 16000
    n_uniform: int = 65536
    corpus_size: int = 200
    sizes: tuple = (10, 25, 50, 100, 200)
    seeds: int = 5
    t60: float = 0.1
    rir_len: int = 3200


def run_seed(cfg: SweepConfig, seed: int) -> dict:
    rng = np.random.default_rng(1000 + seed)
    h = synth_rir(cfg.t60, cfg.sample_rate, cfg.rir_len, seed=seed)
    clean = [make_utterance(rng, cfg.sample_rate) for _ in range(cfg.corpus_size)]
    clean_acc = MeanLogSpectrum(n_uniform=cfg.n_uniform, sample_rate=cfg.sample_rate)
    for s in clean:
        accumulate(clean_acc, to_log_spectrum(forward(s, cfg.n_uniform)))
    errs = {}
    reverb_acc = MeanLogSpectrum(n_uniform=cfg.n_uniform, sample_rate=cfg.sample_rate)
    for i, s in enumerate(clean):
        accumulate(reverb_acc, to_log_spectrum(forward(convolve(s, h), cfg.n_uniform)))
        if i + 1 in cfg.sizes:
            errs[i + 1] = phi_accuracy(estimate_phi(reverb_acc, clean_acc), h)
    return errs


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=SweepConfig.seeds)
    parser.add_argument("--corpus-size", type=int, default=SweepConfig.corpus_size)
    parser.add_argument("--t60", type=float, default=SweepConfig.t60)
    args = parser.parse_args()

    sizes = tuple(s for s in SweepConfig.sizes if s <= args.corpus_size)
    cfg = SweepConfig(
        corpus_size=args.corpus_size, sizes=sizes, seeds=args.seeds, t60=args.t60
    )
    per_seed = [run_seed(cfg, seed) for seed in range(cfg.seeds)]

    print(f"# room t60={cfg.t60} s, {cfg.rir_len} taps; clean corpus fixed at "
          f"{cfg.corpus_size} utterances; medians over {cfg.seeds} seeds")
    print(f"{'reverberant utterances':>24}  {'magnitude error (nats)':>24}")
    for size in cfg.sizes:
        med = float(np.median([e[size] for e in per_seed]))
        print(f"{size:>24d}  {med:>24.6g}")


if __name__ == "__main__":
    main()
