"""Morse code: text codec, unit timing, audio and haptic rendering.

Timing follows the classic unit system: dot = 1 unit on, dash = 3 on,
intra-letter gap = 1 off, letter gap = 3 off, word gap = 7 off. Two text
layouts are supported: "paper" separates letters with one space and words
with two, "slash" separates words with " / ".
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .audio_io import AudioBuffer
from .errors import AliasedFrequency, UnknownCode, UnmappableCharacter

MORSE_TABLE: dict[str, str] = {
    "A": ".-",
    "B": "-...",
    "C": "-.-.",
    "D": "-..",
    "E": ".",
    "F": "..-.",
    "G": "--.",
    "H": "....",
    "I": "..",
    "J": ".---",
    "K": "-.-",
    "L": ".-..",
    "M": "--",
    "N": "-.",
    "O": "---",
    "P": ".--.",
    "Q": "--.-",
    "R": ".-.",
    "S": "...",
    "T": "-",
    "U": "..-",
    "V": "...-",
    "W": ".--",
    "X": "-..-",
    "Y": "-.--",
    "Z": "--..",
    "0": "-----",
    "1": ".----",
    "2": "..---",
    "3": "...--",
    "4": "....-",
    "5": ".....",
    "6": "-....",
    "7": "--...",
    "8": "---..",
    "9": "----.",
    ".": ".-.-.-",
    ",": "--..--",
    "?": "..--..",
    "/": "-..-.",
    ":": "---...",
    "'": ".----.",
    "-": "-....-",
    "(": "-.--.",
    ")": "-.--.-",
    "=": "-...-",
    "+": ".-.-.",
    "@": ".--.-.",
}

REVERSE_TABLE = {code: char for char, code in MORSE_TABLE.items()}

FORMATS = ("paper", "slash")


class Token(Enum):
    DOT = "dot"
    DASH = "dash"
    SYMBOL_GAP = "symbol_gap"
    LETTER_GAP = "letter_gap"
    WORD_GAP = "word_gap"


_GAPS = (Token.SYMBOL_GAP, Token.LETTER_GAP, Token.WORD_GAP)


@dataclass(frozen=True)
class MorseSequence:
    """Token stream; gaps never lead, trail, or sit next to each other."""

    tokens: tuple[Token, ...]

    def __post_init__(self):
        tokens = tuple(self.tokens)
        if tokens:
            if tokens[0] in _GAPS or tokens[-1] in _GAPS:
                raise ValueError("sequence may not start or end with a gap")
            for a, b in zip(tokens, tokens[1:]):
                if a in _GAPS and b in _GAPS:
                    raise ValueError("gaps may not be adjacent")
        object.__setattr__(self, "tokens", tokens)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Segment:
    """One keying interval: on/off plus a whole number of units."""

    on: bool
    units: int


@dataclass(frozen=True)
class TimingPattern:
    """Alternating segments; on in {1, 3} units, off in {1, 3, 7}."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        segments = tuple(self.segments)
        for seg in segments:
            allowed = (1, 3) if seg.on else (1, 3, 7)
            if seg.units not in allowed:
                raise ValueError(f"bad duration {seg.units} for on={seg.on}")
        for a, b in zip(segments, segments[1:]):
            if a.on == b.on:
                raise ValueError("segments must alternate on/off")
        object.__setattr__(self, "segments", segments)

    @property
    def total_units(self) -> int:
        return sum(seg.units for seg in self.segments)


def _checked_words(text: str, skip_unknown: bool) -> list[str]:
    """Uppercased words; unmappable characters raise or are dropped."""
    upper = text.upper()
    words: list[str] = []
    current: list[str] = []
    for position, char in enumerate(upper):
        if char.isspace():
            if current:
                words.append("".join(current))
                current = []
        elif char in MORSE_TABLE:
            current.append(char)
        elif not skip_unknown:
            raise UnmappableCharacter(char, position)
    if current:
        words.append("".join(current))
    return words


def encode(
    text: str, fmt: str = "paper", skip_unknown: bool = False
) -> tuple[str, MorseSequence]:
    """Text to (canonical Morse string, token sequence).

    Input is uppercased and runs of whitespace collapse to single word gaps.

    Raises:
      UnmappableCharacter: a character has no code and skip_unknown is off.
    """
    if fmt not in FORMATS:
        raise ValueError(f"fmt must be one of {FORMATS}")
    words = _checked_words(text, skip_unknown)

    word_strings = [" ".join(MORSE_TABLE[ch] for ch in word) for word in words]
    separator = "  " if fmt == "paper" else " / "
    morse_text = separator.join(word_strings)

    tokens: list[Token] = []
    for w, word in enumerate(words):
        if w:
            tokens.append(Token.WORD_GAP)
        for c, char in enumerate(word):
            if c:
                tokens.append(Token.LETTER_GAP)
            for i, mark in enumerate(MORSE_TABLE[char]):
                if i:
                    tokens.append(Token.SYMBOL_GAP)
                tokens.append(Token.DOT if mark == "." else Token.DASH)
    return morse_text, MorseSequence(tuple(tokens))


def _split_words(morse_text: str, fmt: str) -> list[list[str]]:
    if fmt not in FORMATS:
        raise ValueError(f"fmt must be one of {FORMATS}")
    stripped = morse_text.strip()
    if not stripped:
        return []
    if fmt == "slash":
        raw_words = stripped.split("/")
    else:
        raw_words = re.split(r" {2,}", stripped)
    return [word.split() for word in raw_words if word.split()]


def decode(morse_text: str, fmt: str = "paper") -> str:
    """Morse string back to text. Inverse of encode on its output.

    Raises:
      UnknownCode: a dot-dash group is not in the dictionary.
    """
    words = []
    for groups in _split_words(morse_text, fmt):
        chars = []
        for group in groups:
            char = REVERSE_TABLE.get(group)
            if char is None:
                raise UnknownCode(group)
            chars.append(char)
        words.append("".join(chars))
    return " ".join(words)


def sequence_from_text(morse_text: str, fmt: str = "paper") -> MorseSequence:
    """Token sequence from a Morse string, no dictionary lookup involved.

    Accepts any dot-dash groups, so non-dictionary patterns still render.
    """
    tokens: list[Token] = []
    for w, groups in enumerate(_split_words(morse_text, fmt)):
        if w:
            tokens.append(Token.WORD_GAP)
        for g, group in enumerate(groups):
            if g:
                tokens.append(Token.LETTER_GAP)
            for i, mark in enumerate(group):
                if mark not in ".-":
                    raise UnknownCode(group)
                if i:
                    tokens.append(Token.SYMBOL_GAP)
                tokens.append(Token.DOT if mark == "." else Token.DASH)
    return MorseSequence(tuple(tokens))


_TOKEN_SEGMENTS = {
    Token.DOT: Segment(True, 1),
    Token.DASH: Segment(True, 3),
    Token.SYMBOL_GAP: Segment(False, 1),
    Token.LETTER_GAP: Segment(False, 3),
    Token.WORD_GAP: Segment(False, 7),
}

_SEGMENT_TOKENS = {
    (seg.on, seg.units): token for token, seg in _TOKEN_SEGMENTS.items()
}


def to_timing(sequence: MorseSequence) -> TimingPattern:
    """Token-for-token unit durations; invertible via from_timing."""
    return TimingPattern(tuple(_TOKEN_SEGMENTS[t] for t in sequence.tokens))


def from_timing(pattern: TimingPattern) -> MorseSequence:
    return MorseSequence(
        tuple(_SEGMENT_TOKENS[(seg.on, seg.units)] for seg in pattern.segments)
    )


def render_audio(
    pattern: TimingPattern,
    unit_ms: float = 60.0,
    tone_hz: float = 700.0,
    sample_rate_hz: int = 16000,
    amplitude: float = 0.8,
) -> AudioBuffer:
    """Keyed sine tone with 2 ms raised-cosine ramps on every on-segment.

    Segment boundaries are placed at round(cumulative_units * unit_ms/1000 *
    rate), so the total length matches the pattern duration within a sample.
    """
    if unit_ms <= 0:
        raise ValueError("unit_ms must be positive")
    if tone_hz <= 0:
        raise ValueError("tone_hz must be positive")
    if tone_hz >= sample_rate_hz / 2:
        raise AliasedFrequency(
            f"{tone_hz} Hz is not below Nyquist ({sample_rate_hz / 2} Hz)"
        )
    if not 0.0 <= amplitude <= 1.0:
        raise ValueError("amplitude must lie in [0, 1]")
    samples_per_unit = unit_ms / 1000.0 * sample_rate_hz
    boundaries = [0]
    units = 0
    for seg in pattern.segments:
        units += seg.units
        boundaries.append(round(units * samples_per_unit))
    out = np.zeros(boundaries[-1])
    ramp_len = round(0.002 * sample_rate_hz)
    for seg, start, end in zip(pattern.segments, boundaries, boundaries[1:]):
        if not seg.on or end <= start:
            continue
        n = end - start
        t = np.arange(n, dtype=np.float64)
        tone = amplitude * np.sin(2.0 * np.pi * tone_hz * t / sample_rate_hz)
        ramp = min(ramp_len, n // 2)
        if ramp > 0:
            shape = 0.5 * (1.0 - np.cos(np.pi * np.arange(ramp) / ramp))
            tone[:ramp] *= shape
            tone[n - ramp :] *= shape[::-1]
        out[start:end] = tone
    return AudioBuffer(out, sample_rate_hz)


def render_haptic(pattern: TimingPattern, unit_ms: float = 60.0) -> str:
    """Line-oriented vibration schedule.

    First line is ``unit_ms <value>``; each following line is
    ``t_start_ms duration_ms intensity`` for one on-segment (gaps are
    implicit), intensity always 1.
    """
    if unit_ms <= 0:
        raise ValueError("unit_ms must be positive")
    lines = [f"unit_ms {unit_ms:g}"]
    t = 0.0
    for seg in pattern.segments:
        duration = seg.units * unit_ms
        if seg.on:
            lines.append(f"{t:g} {duration:g} 1")
        t += duration
    return "\n".join(lines) + "\n"
