"""Blind dereverberation by long-window log-spectrum normalization.

Estimates a room's long-term log-spectral signature from reverberant and
clean corpora and subtracts it from new recordings, utterance-wise or over
1.5 s von Hann frames.
"""

from .audio_io import AudioBuffer, read_wav, trim_tail, write_wav
from .corpus import (
    CorpusManifest,
    MeanLogSpectrum,
    accumulate,
    corpus_mean,
    load_manifest,
    mean,
    merge,
    save_manifest,
)
from .metrics import EvalReport, aligned_rmse, log_spectral_distance, phi_accuracy
from .normalize import (
    FramePlan,
    NormalizationVector,
    apply_framed,
    apply_utterance,
    choose_n_uniform,
    corpus_mean_framed,
    estimate_phi,
    hann_window,
    load_phi,
    make_frame_plan,
    overlap_add,
    phi_from_rir,
    save_phi,
)
from .rir import RoomImpulseResponse, convolve, load_rir, save_rir, synth_rir
from .spectral import (
    ComplexSpectrum,
    LogSpectrum,
    forward,
    from_log_spectrum,
    inverse,
    next_pow2,
    to_log_spectrum,
    unwrap_phase,
    zero_pad,
)

__version__ = "0.1.0"
