"""Spectral primitives shared by every analysis module.

DFT pair, window-corrected amplitude spectra, a frequency-domain brick-wall
band-pass, the analytic signal, and waterfall block processing.  Every
function is a pure function of its inputs; returned arrays are read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import numpy.typing as npt

from robovib.errors import ConfigError, InvalidInputError

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

WINDOW_KINDS = ("rectangular", "hann")

# Relative tolerance for treating a spectrum as conjugate-symmetric.
_SYMMETRY_RTOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _as_samples(samples: npt.ArrayLike, name: str = "samples") -> FloatArray:
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional")
    if x.size < 2:
        raise InvalidInputError(f"{name} needs at least 2 values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"{name} must be finite")
    return x


def _check_rate(sample_rate: float) -> float:
    fs = float(sample_rate)
    if not (np.isfinite(fs) and fs > 0):
        raise InvalidInputError(f"sample_rate must be positive, got {sample_rate!r}")
    return fs


@dataclass(frozen=True)
class Recording:
    """Multi-channel time series from one measurement configuration.

    Attributes
    ----------
    label : str
        Configuration tag such as ``"P1"``.
    sample_rate : float
        Samples per second.
    channels : mapping of str to ndarray
        Equal-length real sequences, e.g. ``ax``, ``ay``, ``az``, ``tacho``.
    """

    label: str
    sample_rate: float
    channels: Mapping[str, FloatArray]

    def __post_init__(self):
        _check_rate(self.sample_rate)
        if not self.channels:
            raise InvalidInputError("a recording needs at least one channel")
        frozen = {}
        lengths = set()
        for name, data in self.channels.items():
            x = _as_samples(data, name=f"channel {name!r}")
            frozen[str(name)] = _frozen(x.copy())
            lengths.add(x.size)
        if len(frozen) != len(self.channels):
            raise InvalidInputError("channel names must be unique")
        if len(lengths) != 1:
            raise InvalidInputError(f"channels differ in length: {sorted(lengths)}")
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "channels", frozen)

    @property
    def n_samples(self) -> int:
        return next(iter(self.channels.values())).size

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def __getitem__(self, name: str) -> FloatArray:
        return self.channels[name]


@dataclass(frozen=True)
class ComplexSpectrum:
    """Two-sided DFT in standard bin order."""

    bin_width: float
    bins: ComplexArray

    def __post_init__(self):
        object.__setattr__(self, "bins", _frozen(np.array(self.bins, dtype=np.complex128)))

    @property
    def n(self) -> int:
        return self.bins.size

    @property
    def sample_rate(self) -> float:
        return self.bin_width * self.n

    def frequencies(self) -> FloatArray:
        """Signed bin frequencies in DFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.sample_rate)


@dataclass(frozen=True)
class Window:
    kind: str
    coherent_gain: float


RECTANGULAR = Window("rectangular", 1.0)


@dataclass(frozen=True)
class Spectrum:
    """One-sided amplitude spectrum, corrected for window coherent gain."""

    bin_width: float
    amplitudes: FloatArray
    window: Window = RECTANGULAR

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=np.float64)
        if a.ndim != 1 or a.size == 0:
            raise InvalidInputError("amplitudes must be a non-empty 1-D sequence")
        if np.any(a < 0) or not np.all(np.isfinite(a)):
            raise InvalidInputError("amplitudes must be finite and non-negative")
        if not self.bin_width > 0:
            raise InvalidInputError("bin_width must be positive")
        object.__setattr__(self, "bin_width", float(self.bin_width))
        object.__setattr__(self, "amplitudes", _frozen(a))

    @property
    def frequencies(self) -> FloatArray:
        return np.arange(self.amplitudes.size) * self.bin_width

    @property
    def max_frequency(self) -> float:
        return (self.amplitudes.size - 1) * self.bin_width

    def amplitude_at(self, frequency: float) -> float:
        """Amplitude of the bin nearest to ``frequency``."""
        k = int(round(frequency / self.bin_width))
        if not 0 <= k < self.amplitudes.size:
            raise InvalidInputError(f"{frequency} Hz is outside the spectrum")
        return float(self.amplitudes[k])


@dataclass(frozen=True)
class Waterfall:
    block_times: FloatArray
    spectra: tuple[Spectrum, ...]
    block_size: int
    overlap: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "block_times", _frozen(np.array(self.block_times, dtype=np.float64)))
        object.__setattr__(self, "spectra", tuple(self.spectra))
        if len({s.bin_width for s in self.spectra}) > 1:
            raise InvalidInputError("waterfall spectra must share bin_width")
        if np.any(np.diff(self.block_times) <= 0):
            raise InvalidInputError("block_times must be strictly increasing")

    @property
    def bin_width(self) -> float:
        return self.spectra[0].bin_width

    def matrix(self) -> FloatArray:
        """Amplitudes as a (blocks, bins) array."""
        return np.vstack([s.amplitudes for s in self.spectra])

    def mean_spectrum(self) -> Spectrum:
        """Time-averaged amplitude spectrum over all blocks."""
        return Spectrum(self.bin_width, self.matrix().mean(axis=0), self.spectra[0].window)


@dataclass(frozen=True)
class AnalyticSignal:
    sample_rate: float
    values: ComplexArray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.array(self.values, dtype=np.complex128)))

    @property
    def envelope(self) -> FloatArray:
        return np.abs(self.values)


def dft_forward(samples: npt.ArrayLike, sample_rate: float) -> ComplexSpectrum:
    """Unnormalized forward DFT at the input length (no padding)."""
    x = _as_samples(samples)
    fs = _check_rate(sample_rate)
    return ComplexSpectrum(fs / x.size, np.fft.fft(x))


def dft_inverse(spectrum: ComplexSpectrum) -> np.ndarray:
    """Inverse DFT.

    Returns a real array when the spectrum is conjugate-symmetric (to a
    relative tolerance of 1e-10), otherwise the complex sequence.
    """
    X = spectrum.bins
    if X.size == 0:
        raise InvalidInputError("cannot invert an empty spectrum")
    x = np.fft.ifft(X)
    mirrored = np.conj(X[(-np.arange(X.size)) % X.size])
    scale = np.max(np.abs(X))
    if scale == 0 or np.max(np.abs(X - mirrored)) <= _SYMMETRY_RTOL * scale:
        return x.real.copy()
    return x


def window_weights(kind: str, n: int) -> tuple[FloatArray, Window]:
    """Window samples and descriptor.

    ``hann`` is the periodic (DFT-even) form, which has coherent gain exactly
    0.5 and recovers in-bin sinusoids without scalloping.
    """
    if kind == "rectangular":
        w = np.ones(n)
    elif kind == "hann":
        w = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    else:
        raise ConfigError(f"unknown window kind {kind!r}; expected one of {WINDOW_KINDS}")
    return w, Window(kind, float(w.mean()))


def amplitude_spectrum(
    samples: npt.ArrayLike,
    sample_rate: float,
    window: str = "hann",
    n_fft: int | None = None,
) -> Spectrum:
    """One-sided amplitude spectrum.

    Parameters
    ----------
    samples : array_like
        Real input, at least 2 samples.
    sample_rate : float
        Hz.
    window : {"hann", "rectangular"}
    n_fft : int, optional
        Zero-pad to this length. Defaults to the input length.

    Returns
    -------
    Spectrum
        Amplitudes scaled so that an in-bin sinusoid of amplitude A reads A.
        DC and Nyquist bins are not doubled.
    """
    x = _as_samples(samples)
    fs = _check_rate(sample_rate)
    w, desc = window_weights(window, x.size)
    n = x.size if n_fft is None else int(n_fft)
    if n < x.size:
        raise InvalidInputError(f"n_fft={n} is shorter than the input ({x.size})")
    amp = np.abs(np.fft.rfft(x * w, n=n)) / w.sum()
    # bins 1..ceil(n/2)-1 have a negative-frequency twin
    amp[1 : (n + 1) // 2] *= 2.0
    return Spectrum(fs / n, amp, desc)


def bandpass_brickwall(
    samples: npt.ArrayLike, sample_rate: float, f_lo: float, f_hi: float
) -> FloatArray:
    """Zero every DFT bin whose |frequency| lies outside [f_lo, f_hi]."""
    fs = _check_rate(sample_rate)
    if not (0 <= f_lo < f_hi <= fs / 2):
        raise ConfigError(
            f"band [{f_lo}, {f_hi}] Hz must satisfy 0 <= f_lo < f_hi <= {fs / 2}"
        )
    spec = dft_forward(samples, fs)
    f = np.abs(spec.frequencies())
    bins = np.where((f >= f_lo) & (f <= f_hi), spec.bins, 0.0)
    out = dft_inverse(ComplexSpectrum(spec.bin_width, bins))
    return np.real(out).copy()


def hilbert_analytic(samples: npt.ArrayLike, sample_rate: float) -> AnalyticSignal:
    """Analytic signal by frequency-domain construction.

    DC (and Nyquist, for even length) bins are kept, positive-frequency bins
    doubled and negative-frequency bins zeroed before the inverse DFT.
    """
    spec = dft_forward(samples, sample_rate)
    n = spec.n
    gain = np.zeros(n)
    gain[0] = 1.0
    gain[1 : (n + 1) // 2] = 2.0
    if n % 2 == 0:
        gain[n // 2] = 1.0
    z = np.fft.ifft(spec.bins * gain)
    return AnalyticSignal(spec.sample_rate, z)


def waterfall(
    samples: npt.ArrayLike,
    sample_rate: float,
    block_size: int = 2000,
    overlap: float = 0.0,
    window: str = "hann",
) -> Waterfall:
    """Block amplitude spectra stepped by ``block_size * (1 - overlap)``.

    A trailing partial block is discarded.
    """
    x = _as_samples(samples)
    fs = _check_rate(sample_rate)
    block_size = int(block_size)
    if not 0 <= overlap < 1:
        raise ConfigError(f"overlap must be in [0, 1), got {overlap}")
    if block_size < 2:
        raise InvalidInputError("block_size must be at least 2")
    if block_size > x.size:
        raise InvalidInputError(f"block_size {block_size} exceeds signal length {x.size}")
    step = max(1, int(round(block_size * (1.0 - overlap))))
    starts = np.arange(0, x.size - block_size + 1, step)
    spectra = tuple(
        amplitude_spectrum(x[s : s + block_size], fs, window) for s in starts
    )
    return Waterfall(starts / fs, spectra, block_size, float(overlap))
