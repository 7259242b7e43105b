"""Exception types shared across the pipeline."""


class SpeechMorseError(Exception):
    """Base class for every error raised by this package."""


class MalformedContainer(SpeechMorseError):
    """WAV container is structurally broken (bad magic, truncated chunk)."""


class UnsupportedEncoding(SpeechMorseError):
    """WAV payload uses a codec or layout this reader does not handle."""


class IoFailure(SpeechMorseError):
    """Operating-system level failure while writing a file."""


class SilentSignal(SpeechMorseError):
    """Signal power is zero, so an SNR target is meaningless."""


class AliasedFrequency(SpeechMorseError):
    """Requested tone frequency is at or above Nyquist."""


class NonPowerOfTwoFft(SpeechMorseError):
    """Configured FFT size is not a power of two."""


class FilterCollapse(SpeechMorseError):
    """Two adjacent mel filter centers landed on the same FFT bin."""


class SymbolOutOfAlphabet(SpeechMorseError):
    """A character or label index is not part of the decoding alphabet."""


class EmptyText(SpeechMorseError):
    """Perplexity is undefined for an empty token sequence."""


class EmptyReference(SpeechMorseError):
    """WER is undefined when the references contain zero words."""


class UnmappableCharacter(SpeechMorseError):
    """A character has no Morse code, reported with its input position."""

    def __init__(self, character: str, position: int):
        self.character = character
        self.position = position
        super().__init__(f"no Morse code for {character!r} at position {position}")


class UnknownCode(SpeechMorseError):
    """A dot-dash group does not appear in the Morse dictionary."""

    def __init__(self, code: str):
        self.code = code
        super().__init__(f"unknown Morse code group {code!r}")
