"""Short-time spectral features: power spectrogram, log-mel energies, MFCC.

Processing order is fixed: pre-emphasis over the whole signal, framing with a
trailing partial frame dropped, windowing, zero-padded power FFT, triangular
mel filtering on the mel scale mel(f) = 2595*log10(1 + f/700), natural log
with a floor, then an orthonormal DCT-II keeping the first n_mfcc
coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioBuffer
from .errors import FilterCollapse, NonPowerOfTwoFft

POWER_SPECTROGRAM = "power_spectrogram"
LOG_MEL = "log_mel"
MFCC = "mfcc"
_KINDS = (POWER_SPECTROGRAM, LOG_MEL, MFCC)

_WINDOWS = {
    "hamming": np.hamming,
    "hann": np.hanning,
    "rectangular": np.ones,
}


def hz_to_mel(freq_hz):
    """Converts Hz to mel: 2595 * log10(1 + f/700)."""
    return 2595.0 * np.log10(1.0 + np.asarray(freq_hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    """Inverse of hz_to_mel."""
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class FrameConfig:
    """Framing and filterbank parameters.

    n_fft of None resolves to the next power of two at or above the frame
    length in samples; an explicit value must itself be a power of two.
    fmax_hz of None resolves to Nyquist.
    """

    frame_len_ms: float = 25.0
    hop_ms: float = 10.0
    preemphasis: float = 0.97
    n_fft: int | None = None
    n_mels: int = 26
    n_mfcc: int = 13
    fmin_hz: float = 0.0
    fmax_hz: float | None = None
    window: str = "hamming"
    log_floor: float = 1e-10

    def __post_init__(self):
        if self.frame_len_ms <= 0 or self.hop_ms <= 0:
            raise ValueError("frame_len_ms and hop_ms must be positive")
        if self.hop_ms > self.frame_len_ms:
            raise ValueError("hop_ms must not exceed frame_len_ms")
        if not 0.0 <= self.preemphasis < 1.0:
            raise ValueError("preemphasis must lie in [0, 1)")
        if self.n_mels < 1 or self.n_mfcc < 1:
            raise ValueError("n_mels and n_mfcc must be positive")
        if self.n_mfcc > self.n_mels:
            raise ValueError("n_mfcc must not exceed n_mels")
        if self.fmin_hz < 0:
            raise ValueError("fmin_hz must be non-negative")
        if self.window not in _WINDOWS:
            raise ValueError(f"window must be one of {sorted(_WINDOWS)}")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")

    def frame_len(self, sample_rate_hz: int) -> int:
        return max(1, round(self.frame_len_ms * sample_rate_hz / 1000.0))

    def hop(self, sample_rate_hz: int) -> int:
        return max(1, round(self.hop_ms * sample_rate_hz / 1000.0))

    def fft_size(self, sample_rate_hz: int) -> int:
        """Resolved FFT size; raises NonPowerOfTwoFft for a bad explicit value."""
        frame_len = self.frame_len(sample_rate_hz)
        if self.n_fft is None:
            n = 1
            while n < frame_len:
                n *= 2
            return n
        if not _is_power_of_two(self.n_fft):
            raise NonPowerOfTwoFft(f"n_fft={self.n_fft} is not a power of two")
        if self.n_fft < frame_len:
            raise ValueError(
                f"n_fft={self.n_fft} is smaller than the frame length {frame_len}"
            )
        return self.n_fft

    def fmax(self, sample_rate_hz: int) -> float:
        nyquist = sample_rate_hz / 2.0
        fmax = nyquist if self.fmax_hz is None else float(self.fmax_hz)
        if not self.fmin_hz < fmax <= nyquist:
            raise ValueError(
                f"need fmin_hz < fmax_hz <= Nyquist, got {self.fmin_hz}, {fmax}"
            )
        return fmax


@dataclass(frozen=True)
class FeatureMatrix:
    """Immutable T x D feature block with per-frame center timestamps."""

    values: np.ndarray
    kind: str
    frame_times_s: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        times = np.array(self.frame_times_s, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise ValueError("values must be T x D")
        if times.shape != (values.shape[0],):
            raise ValueError("frame_times_s must have one entry per frame")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")
        if self.kind == POWER_SPECTROGRAM and values.size and values.min() < 0:
            raise ValueError("power spectrogram values must be non-negative")
        values.setflags(write=False)
        times.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "frame_times_s", times)

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]


def frame_signal(buffer: AudioBuffer, cfg: FrameConfig) -> np.ndarray:
    """Pre-emphasized, windowed frames as an (num_frames, frame_len) array.

    Pre-emphasis is y[n] = x[n] - p*x[n-1] with y[0] = x[0], applied to the
    whole signal before framing. The number of frames is
    floor((N - frame_len)/hop) + 1 for N >= frame_len, else zero; a trailing
    partial frame is dropped.
    """
    x = buffer.samples
    if cfg.preemphasis > 0 and len(x) > 1:
        y = np.concatenate(([x[0]], x[1:] - cfg.preemphasis * x[:-1]))
    else:
        y = x
    frame_len = cfg.frame_len(buffer.sample_rate_hz)
    hop = cfg.hop(buffer.sample_rate_hz)
    if len(y) < frame_len:
        return np.zeros((0, frame_len))
    num_frames = (len(y) - frame_len) // hop + 1
    idx = np.arange(frame_len)[None, :] + hop * np.arange(num_frames)[:, None]
    return y[idx] * _WINDOWS[cfg.window](frame_len)


def _frame_times(num_frames: int, cfg: FrameConfig, sample_rate_hz: int) -> np.ndarray:
    frame_len = cfg.frame_len(sample_rate_hz)
    hop = cfg.hop(sample_rate_hz)
    starts = hop * np.arange(num_frames, dtype=np.float64)
    return (starts + frame_len / 2.0) / sample_rate_hz


def power_spectrogram(buffer: AudioBuffer, cfg: FrameConfig = FrameConfig()) -> FeatureMatrix:
    """Single-sided power spectrogram |FFT|^2 / n_fft, D = n_fft/2 + 1 bins."""
    n_fft = cfg.fft_size(buffer.sample_rate_hz)
    frames = frame_signal(buffer, cfg)
    spectrum = np.fft.rfft(frames, n=n_fft, axis=1)
    power = (spectrum.real**2 + spectrum.imag**2) / n_fft
    times = _frame_times(frames.shape[0], cfg, buffer.sample_rate_hz)
    return FeatureMatrix(power, POWER_SPECTROGRAM, times)


def mel_filterbank(
    cfg: FrameConfig, sample_rate_hz: int, n_fft: int
) -> tuple[np.ndarray, np.ndarray]:
    """Triangular mel filters over FFT bins.

    Filter centers are uniformly spaced on the mel scale between fmin and
    fmax, snapped to FFT bins; each filter's endpoints are its neighbors'
    centers, so adjacent filters overlap. Peak weight is 1 at the center bin.

    Returns:
      (weights, centers_hz): weights is (n_mels, n_fft/2 + 1); centers_hz
      holds the snapped center frequency of each filter.

    Raises:
      FilterCollapse: two adjacent mel points map to the same FFT bin.
    """
    fmin = cfg.fmin_hz
    fmax = cfg.fmax(sample_rate_hz)
    pts_mel = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), cfg.n_mels + 2)
    pts_hz = mel_to_hz(pts_mel)
    bins = np.floor((n_fft + 1) * pts_hz / sample_rate_hz).astype(int)
    if np.any(np.diff(bins) < 1):
        raise FilterCollapse(
            f"{cfg.n_mels} filters need more than {n_fft} FFT points at "
            f"{sample_rate_hz} Hz: adjacent centers share a bin"
        )
    n_bins = n_fft // 2 + 1
    weights = np.zeros((cfg.n_mels, n_bins))
    for j in range(cfg.n_mels):
        left, center, right = bins[j], bins[j + 1], bins[j + 2]
        for i in range(left, center):
            weights[j, i] = (i - left) / (center - left)
        for i in range(center, right):
            weights[j, i] = (right - i) / (right - center)
    centers_hz = bins[1:-1] * sample_rate_hz / n_fft
    return weights, centers_hz


def mel_filterbank_energies(
    spectrogram: FeatureMatrix, cfg: FrameConfig, sample_rate_hz: int
) -> FeatureMatrix:
    """Log mel-band energies ln(max(energy, log_floor)) per frame."""
    if spectrogram.kind != POWER_SPECTROGRAM:
        raise ValueError("mel energies are computed from a power spectrogram")
    n_fft = 2 * (spectrogram.values.shape[1] - 1)
    weights, _ = mel_filterbank(cfg, sample_rate_hz, n_fft)
    energies = spectrogram.values @ weights.T
    log_energies = np.log(np.maximum(energies, cfg.log_floor))
    return FeatureMatrix(log_energies, LOG_MEL, spectrogram.frame_times_s)


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis: rows are basis vectors, C @ C.T = I."""
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    basis = np.sqrt(2.0 / n) * np.cos(np.pi * k * (2 * j + 1) / (2 * n))
    basis[0] /= np.sqrt(2.0)
    return basis


def mfcc(buffer: AudioBuffer, cfg: FrameConfig = FrameConfig()) -> FeatureMatrix:
    """MFCCs: DCT-II of the log-mel energies, first n_mfcc coefficients kept."""
    spec = power_spectrogram(buffer, cfg)
    log_mel = mel_filterbank_energies(spec, cfg, buffer.sample_rate_hz)
    basis = dct_matrix(cfg.n_mels)[: cfg.n_mfcc]
    coeffs = log_mel.values @ basis.T
    return FeatureMatrix(coeffs, MFCC, log_mel.frame_times_s)


def export_csv(matrix: FeatureMatrix, path) -> None:
    """Writes one frame per row: frame time in column 0, then the values."""
    block = np.hstack([matrix.frame_times_s[:, None], matrix.values])
    with open(path, "w", encoding="ascii") as fh:
        for row in block:
            fh.write(",".join(f"{v:.10g}" for v in row) + "\n")
