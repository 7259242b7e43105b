"""Mono audio buffers: WAV file I/O, calibrated noise injection, tone synthesis.

The pipeline keeps every sample as a normalized float amplitude (nominal range
[-1, 1]); container bit depth only matters at the file boundary. Readable
inputs are RIFF/WAVE files holding 16-bit PCM or 32-bit IEEE float, one or two
channels (stereo is downmixed by the per-sample channel mean). Output files
are always 16-bit PCM mono.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    AliasedFrequency,
    IoFailure,
    MalformedContainer,
    SilentSignal,
    UnsupportedEncoding,
)

# 16-bit full scale: integer samples map to q / 32768 on read.
INT16_SCALE = 32768.0

_WAVE_FORMAT_PCM = 1
_WAVE_FORMAT_IEEE_FLOAT = 3


@dataclass(frozen=True)
class AudioBuffer:
    """Immutable mono signal: 1-D float64 samples plus a sample rate.

    Attributes:
      samples: 1-D float64 array, finite everywhere. Stored read-only.
      sample_rate_hz: positive integer sampling rate.
    """

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64, copy=True)
        if samples.ndim != 1:
            raise ValueError("AudioBuffer is mono: samples must be 1-D")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        rate = int(self.sample_rate_hz)
        if rate <= 0:
            raise ValueError("sample_rate_hz must be positive")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", rate)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    @property
    def power(self) -> float:
        """Mean squared amplitude; 0.0 for an empty buffer."""
        if len(self) == 0:
            return 0.0
        return float(np.mean(self.samples**2))


def load_wav(path) -> AudioBuffer:
    """Reads a RIFF/WAVE file into a mono AudioBuffer.

    16-bit PCM samples are scaled by 1/32768; 32-bit IEEE float samples are
    taken as-is. Stereo content is downmixed with the per-sample mean.

    Raises:
      MalformedContainer: bad magic, truncated chunk, or a broken data chunk.
      UnsupportedEncoding: compressed formats, other bit depths, >2 channels.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise MalformedContainer(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(blob):
        chunk_id = blob[pos : pos + 4]
        (size,) = struct.unpack_from("<I", blob, pos + 4)
        body = blob[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise MalformedContainer(
                f"{path}: chunk {chunk_id!r} truncated ({len(body)} of {size} bytes)"
            )
        if chunk_id == b"fmt ":
            if size < 16:
                raise MalformedContainer(f"{path}: fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", body)
        elif chunk_id == b"data":
            data = body
        pos += 8 + size + (size & 1)  # chunks are word aligned

    if fmt is None or data is None:
        raise MalformedContainer(f"{path}: missing fmt or data chunk")

    audio_format, channels, sample_rate, _byte_rate, block_align, bits = fmt
    if sample_rate <= 0:
        raise MalformedContainer(f"{path}: sample rate {sample_rate}")
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{path}: {channels} channels (expected 1 or 2)")
    if (audio_format, bits) == (_WAVE_FORMAT_PCM, 16):
        dtype = "<i2"
    elif (audio_format, bits) == (_WAVE_FORMAT_IEEE_FLOAT, 32):
        dtype = "<f4"
    else:
        raise UnsupportedEncoding(
            f"{path}: format code {audio_format} at {bits} bits per sample"
        )
    expected_align = channels * bits // 8
    if block_align != expected_align:
        raise MalformedContainer(
            f"{path}: block align {block_align}, expected {expected_align}"
        )
    if len(data) % block_align != 0:
        raise MalformedContainer(f"{path}: data chunk ends mid frame")

    raw = np.frombuffer(data, dtype=dtype)
    if dtype == "<i2":
        samples = raw.astype(np.float64) / INT16_SCALE
    else:
        samples = raw.astype(np.float64)
        if not np.all(np.isfinite(samples)):
            raise MalformedContainer(f"{path}: non-finite float samples")
    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    return AudioBuffer(samples, sample_rate)


def save_wav(buffer: AudioBuffer, path) -> None:
    """Writes a buffer as 16-bit PCM mono WAV.

    Samples are clipped to full scale, so a value of 2.0 is written as +32767.
    Round-trip error for in-range samples is at most 1/32768 per sample.

    Raises:
      IoFailure: the file could not be written.
    """
    q = np.clip(np.rint(buffer.samples * INT16_SCALE), -32768, 32767).astype("<i2")
    payload = q.tobytes()
    header = (
        b"RIFF"
        + struct.pack("<I", 36 + len(payload))
        + b"WAVE"
        + b"fmt "
        + struct.pack(
            "<IHHIIHH",
            16,
            _WAVE_FORMAT_PCM,
            1,
            buffer.sample_rate_hz,
            buffer.sample_rate_hz * 2,
            2,
            16,
        )
        + b"data"
        + struct.pack("<I", len(payload))
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def add_noise(buffer: AudioBuffer, snr_db: float, seed: int = 0) -> AudioBuffer:
    """Adds white Gaussian noise at an exact signal-to-noise ratio.

    The noise is rescaled after generation so the realized ratio
    10*log10(P_signal / P_noise) equals snr_db to float precision, for any
    seed. The input buffer is not modified.

    Raises:
      SilentSignal: the input has zero power, so SNR is undefined.
    """
    snr_db = float(snr_db)
    if not np.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    p_signal = buffer.power
    if p_signal == 0.0:
        raise SilentSignal("cannot set an SNR against a zero-power signal")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(buffer))
    p_noise = float(np.mean(noise**2))
    if p_noise == 0.0:  # unreachable for any practical length, defensive only
        raise SilentSignal("degenerate noise draw")
    target = p_signal * 10.0 ** (-snr_db / 10.0)
    noise *= np.sqrt(target / p_noise)
    return AudioBuffer(buffer.samples + noise, buffer.sample_rate_hz)


def synthesize_tone(
    freq_hz: float,
    duration_s: float,
    sample_rate_hz: int = 16000,
    amplitude: float = 1.0,
) -> AudioBuffer:
    """Generates amplitude * sin(2*pi*freq*t) over round(duration*rate) samples.

    Raises:
      AliasedFrequency: freq_hz is at or above the Nyquist frequency.
      ValueError: non-positive frequency, negative duration, amplitude
        outside [0, 1], or non-positive rate.
    """
    if sample_rate_hz <= 0:
        raise ValueError("sample_rate_hz must be positive")
    if freq_hz <= 0:
        raise ValueError("freq_hz must be positive")
    if freq_hz >= sample_rate_hz / 2:
        raise AliasedFrequency(
            f"{freq_hz} Hz is not below Nyquist ({sample_rate_hz / 2} Hz)"
        )
    if duration_s < 0:
        raise ValueError("duration_s must be non-negative")
    if not 0.0 <= amplitude <= 1.0:
        raise ValueError("amplitude must lie in [0, 1]")
    n = round(duration_s * sample_rate_hz)
    t = np.arange(n, dtype=np.float64)
    samples = amplitude * np.sin(2.0 * np.pi * freq_hz * t / sample_rate_hz)
    return AudioBuffer(samples, sample_rate_hz)
