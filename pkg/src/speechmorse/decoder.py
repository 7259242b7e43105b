"""Transcription front end: acoustic scorer interface and beam decoding.

The only scorer shipped here is a seeded oracle that manufactures posterior
grids from a known reference, with corruption knobs to dial error rates.
It acts as a stand-in for a trained acoustic model, so the decoding,
fusion, and evaluation machinery can be exercised end to end with
controlled inputs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

from .audio_io import AudioBuffer
from .ctc import DEFAULT_ALPHABET, Alphabet, PosteriorGrid, prefix_beam_decode


@dataclass(frozen=True)
class DecodeConfig:
    """Beam search knobs: width, LM weight, per-symbol length bonus."""

    beam_width: int = 16
    alpha: float = 0.8
    beta: float = 1.2

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be at least 1")


@runtime_checkable
class AcousticScorer(Protocol):
    """Anything that maps audio to a per-frame posterior grid."""

    alphabet: Alphabet

    def posteriors(self, audio: AudioBuffer) -> PosteriorGrid: ...


@dataclass(frozen=True)
class OracleScorerConfig:
    """Controls for the synthetic posterior generator.

    confusion_rate is the per-symbol chance that a whole symbol block is
    emitted as some other symbol; blank_prob shifts per-frame mass onto
    blank. Both default to the clean setting.
    """

    reference_text: str
    frames_per_symbol: int = 3
    confusion_rate: float = 0.0
    blank_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.frames_per_symbol < 1:
            raise ValueError("frames_per_symbol must be at least 1")
        if self.confusion_rate < 0 or self.blank_prob < 0:
            raise ValueError("corruption rates must be non-negative")
        if self.confusion_rate + self.blank_prob >= 1.0:
            raise ValueError("confusion_rate + blank_prob must stay below 1")


def _symbol_row(n_symbols: int, emit: int, cfg: OracleScorerConfig) -> np.ndarray:
    row = np.zeros(n_symbols + 1)
    if cfg.confusion_rate > 0:
        row[:n_symbols] = cfg.confusion_rate / (n_symbols - 1)
    row[emit] = 1.0 - cfg.confusion_rate - cfg.blank_prob
    row[n_symbols] = cfg.blank_prob
    return row


def _separator_row(n_symbols: int, cfg: OracleScorerConfig) -> np.ndarray:
    row = np.zeros(n_symbols + 1)
    if cfg.confusion_rate > 0:
        row[:n_symbols] = cfg.confusion_rate / n_symbols
    row[n_symbols] = 1.0 - cfg.confusion_rate
    return row


def oracle_posteriors(
    cfg: OracleScorerConfig, alphabet: Alphabet = DEFAULT_ALPHABET
) -> PosteriorGrid:
    """Synthetic posterior grid spelling the (uppercased) reference.

    Each symbol gets frames_per_symbol frames concentrating mass
    1 - confusion_rate - blank_prob on the emitted symbol, blank_prob on
    blank, and the rest uniformly on the other symbols. A confused block
    (drawn per symbol at confusion_rate, seeded) concentrates on one wrong
    symbol instead. Adjacent repeated reference symbols are separated by a
    single blank-dominant frame so the CTC collapse keeps both; with zero
    corruption the grid greedy-decodes back to the reference exactly.

    Raises:
      SymbolOutOfAlphabet: the reference uses a symbol the alphabet lacks.
    """
    text = cfg.reference_text.upper()
    labels = [alphabet.index(ch) for ch in text]
    n_symbols = len(alphabet)
    if cfg.confusion_rate > 0 and n_symbols < 2:
        raise ValueError("confusion needs at least two symbols to confuse")
    rng = np.random.default_rng(cfg.seed)
    rows: list[np.ndarray] = []
    prev = None
    for label in labels:
        if prev is not None and label == prev:
            rows.append(_separator_row(n_symbols, cfg))
        emit = label
        if cfg.confusion_rate > 0 and rng.random() < cfg.confusion_rate:
            wrong = int(rng.integers(n_symbols - 1))
            if wrong >= label:
                wrong += 1
            emit = wrong
        rows.extend([_symbol_row(n_symbols, emit, cfg)] * cfg.frames_per_symbol)
        prev = label
    probs = np.array(rows) if rows else np.zeros((0, n_symbols + 1))
    return PosteriorGrid(probs, alphabet)


@dataclass(frozen=True)
class OracleScorer:
    """AcousticScorer test double; the audio content is ignored."""

    cfg: OracleScorerConfig
    alphabet: Alphabet = field(default_factory=Alphabet)

    def posteriors(self, audio: AudioBuffer | None = None) -> PosteriorGrid:
        return oracle_posteriors(self.cfg, self.alphabet)


@dataclass(frozen=True)
class Transcript:
    """Decoded text, its combined score, and the wall-clock decode time."""

    text: str
    score: float
    timing_ms: float


def transcribe(
    source: AudioBuffer | PosteriorGrid,
    scorer: AcousticScorer | None = None,
    decode: DecodeConfig | None = None,
    lm=None,
) -> Transcript:
    """Scores (if needed) and beam-decodes one utterance.

    Audio sources require a scorer; a PosteriorGrid is decoded directly.
    An empty grid yields an empty transcript with score 0.0. timing_ms
    wraps scoring plus decoding.
    """
    decode = decode or DecodeConfig()
    start = time.perf_counter()
    if isinstance(source, AudioBuffer):
        if scorer is None:
            raise ValueError("audio input requires an acoustic scorer")
        grid = scorer.posteriors(source)
    elif isinstance(source, PosteriorGrid):
        grid = source
    else:
        raise TypeError("source must be an AudioBuffer or PosteriorGrid")
    ranked = prefix_beam_decode(
        grid, decode.beam_width, lm=lm, alpha=decode.alpha, beta=decode.beta
    )
    top_labels, top_score = ranked[0]
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return Transcript(
        text=top_labels.to_text(grid.alphabet),
        score=float(top_score),
        timing_ms=elapsed_ms,
    )
