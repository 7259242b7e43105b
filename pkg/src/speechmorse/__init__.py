"""Speech-to-Morse pipeline.

Audio in, Morse out: short-time features, CTC prefix beam decoding with
optional n-gram shallow fusion, Morse timing/audio/haptic rendering, and a
WER evaluation harness driven by corpus manifests.
"""

__version__ = "0.1.0"

from .audio_io import AudioBuffer, add_noise, load_wav, save_wav, synthesize_tone
from .ctc import (
    DEFAULT_ALPHABET,
    Alphabet,
    LabelSeq,
    PosteriorGrid,
    ctc_gradient,
    ctc_log_likelihood,
    greedy_decode,
    prefix_beam_decode,
    read_grid,
    write_grid,
)
from .decoder import (
    DecodeConfig,
    OracleScorer,
    OracleScorerConfig,
    Transcript,
    oracle_posteriors,
    transcribe,
)
from .evaluate import (
    AggregateReport,
    EvalPair,
    HarnessConfig,
    WerReport,
    aggregate,
    levenshtein_align,
    run_corpus,
    sentence_accuracy,
    wer,
)
from .features import (
    FeatureMatrix,
    FrameConfig,
    mel_filterbank_energies,
    mfcc,
    power_spectrogram,
)
from .lm import NGramModel, load, tokenize_chars, tokenize_words, train
from .morse import (
    MorseSequence,
    TimingPattern,
    decode,
    encode,
    from_timing,
    render_audio,
    render_haptic,
    sequence_from_text,
    to_timing,
)

__all__ = [
    "AudioBuffer",
    "add_noise",
    "load_wav",
    "save_wav",
    "synthesize_tone",
    "Alphabet",
    "DEFAULT_ALPHABET",
    "LabelSeq",
    "PosteriorGrid",
    "ctc_gradient",
    "ctc_log_likelihood",
    "greedy_decode",
    "prefix_beam_decode",
    "read_grid",
    "write_grid",
    "DecodeConfig",
    "OracleScorer",
    "OracleScorerConfig",
    "Transcript",
    "oracle_posteriors",
    "transcribe",
    "AggregateReport",
    "EvalPair",
    "HarnessConfig",
    "WerReport",
    "aggregate",
    "levenshtein_align",
    "run_corpus",
    "sentence_accuracy",
    "wer",
    "FeatureMatrix",
    "FrameConfig",
    "mel_filterbank_energies",
    "mfcc",
    "power_spectrogram",
    "NGramModel",
    "load",
    "tokenize_chars",
    "tokenize_words",
    "train",
    "MorseSequence",
    "TimingPattern",
    "decode",
    "encode",
    "from_timing",
    "render_audio",
    "render_haptic",
    "sequence_from_text",
    "to_timing",
    "__version__",
]
