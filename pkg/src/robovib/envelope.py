"""Envelope method for milling vibration.

The signal is band-passed around a structural resonance band, its envelope
taken as the magnitude of the analytic signal, and the spectrum of the
mean-removed envelope searched for rotation harmonics, tooth-asymmetry
lines and low-frequency structural modulation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import numpy.typing as npt

from robovib.errors import ConfigError
from robovib.modal import detect_peaks, effective_floor
from robovib.rotation import default_order_tol, order_amplitude
from robovib.signal_core import (
    Spectrum,
    _frozen,
    _check_rate,
    amplitude_spectrum,
    bandpass_brickwall,
    hilbert_analytic,
)

DEFAULT_BAND = (2000.0, 3000.0)

ROTATION_HARMONIC = "rotation-harmonic"
STRUCTURAL = "structural"
UNATTRIBUTED = "unattributed"


@dataclass(frozen=True)
class EnvelopeAnalysis:
    sample_rate: float
    band: tuple[float, float]
    envelope: npt.NDArray[np.float64] = field(repr=False)
    axis: str = ""
    envelope_spectrum: Spectrum | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "envelope", _frozen(np.array(self.envelope, dtype=np.float64)))

    @property
    def envelope_ac(self) -> npt.NDArray[np.float64]:
        """Envelope with its mean removed."""
        return self.envelope - self.envelope.mean()


@dataclass(frozen=True)
class ModulationPeak:
    frequency: float
    amplitude: float
    attribution: str
    order: int | None = None


@dataclass(frozen=True)
class ToothAsymmetryReport:
    rotation_frequency: float
    teeth: int
    order_amplitudes: dict[int, float]
    tooth_pass_amplitude: float
    asymmetry_index: float
    flagged: bool
    threshold: float
    absent: tuple[int, ...] = ()


def _check_band(band: Sequence[float], sample_rate: float) -> tuple[float, float]:
    f_lo, f_hi = float(band[0]), float(band[1])
    nyq = sample_rate / 2
    if not 0 < f_lo < f_hi < nyq:
        raise ConfigError(f"envelope band [{f_lo}, {f_hi}] Hz must lie inside (0, {nyq}) Hz")
    return f_lo, f_hi


def envelope_signal(
    samples: npt.ArrayLike,
    sample_rate: float,
    band: Sequence[float] = DEFAULT_BAND,
    axis: str = "",
) -> EnvelopeAnalysis:
    """Magnitude of the analytic signal of the band-passed input."""
    fs = _check_rate(sample_rate)
    f_lo, f_hi = _check_band(band, fs)
    filtered = bandpass_brickwall(samples, fs, f_lo, f_hi)
    env = np.abs(hilbert_analytic(filtered, fs).values)
    return EnvelopeAnalysis(fs, (f_lo, f_hi), env, axis)


def envelope_spectrum(analysis: EnvelopeAnalysis, window: str = "hann") -> Spectrum:
    """Amplitude spectrum of the mean-removed envelope over the full record."""
    return amplitude_spectrum(analysis.envelope_ac, analysis.sample_rate, window)


def analyze_envelope(
    samples: npt.ArrayLike,
    sample_rate: float,
    band: Sequence[float] = DEFAULT_BAND,
    axis: str = "",
    window: str = "hann",
) -> EnvelopeAnalysis:
    """`envelope_signal` followed by `envelope_spectrum`, both kept."""
    env = envelope_signal(samples, sample_rate, band, axis)
    spec = envelope_spectrum(env, window)
    return EnvelopeAnalysis(env.sample_rate, env.band, env.envelope, axis, spec)


def detect_modulation(
    env_spec: Spectrum,
    f_rot: float | None,
    lfr_modal_frequencies: Sequence[float] = (),
    tol: float = 1.0,
    floor_factor: float = 5.0,
    min_prominence: float = 0.1,
) -> list[ModulationPeak]:
    """Peak-pick the envelope spectrum and attribute each peak.

    Rotation harmonics (within ``tol`` of some k*f_rot, k >= 1) take
    precedence over structural modes (within ``tol`` of a supplied LFR modal
    frequency); the rest are unattributed.
    """
    out = []
    modal = np.asarray(lfr_modal_frequencies, dtype=np.float64)
    for p in detect_peaks(env_spec, floor_factor, min_prominence):
        f = p.frequency
        if f_rot:
            k = max(1, int(round(f / f_rot)))
            if abs(f - k * f_rot) <= tol:
                out.append(ModulationPeak(f, p.amplitude, ROTATION_HARMONIC, k))
                continue
        if modal.size and np.min(np.abs(modal - f)) <= tol:
            out.append(ModulationPeak(f, p.amplitude, STRUCTURAL))
        else:
            out.append(ModulationPeak(f, p.amplitude, UNATTRIBUTED))
    return out


def tooth_asymmetry(
    env_spec: Spectrum,
    f_rot: float,
    teeth: int,
    tol: float | None = None,
    threshold: float = 0.2,
    floor_factor: float = 5.0,
) -> ToothAsymmetryReport:
    """Compare envelope lines below the tooth-pass frequency with the tooth-pass line.

    ``asymmetry_index = max(A_k, k < teeth) / A_teeth``.  A tooth-pass line
    that does not rise above ``floor_factor`` times the spectrum's floor
    (`effective_floor`) counts as zero, which makes the index 0.  Orders
    above the spectrum's range are listed in ``absent`` and read as 0.
    """
    if teeth < 2:
        raise ConfigError(f"tooth asymmetry needs at least 2 teeth, got {teeth}")
    if not f_rot > 0:
        raise ConfigError("rotation frequency must be positive")
    amps: dict[int, float] = {}
    absent = []
    for k in range(1, teeth + 1):
        f = k * f_rot
        if f > env_spec.max_frequency:
            absent.append(k)
            amps[k] = 0.0
            continue
        w = default_order_tol(env_spec, f) if tol is None else tol
        amps[k] = order_amplitude(env_spec, f, w)
    tp = amps.pop(teeth)
    floor = floor_factor * effective_floor(env_spec.amplitudes)
    if tp > floor and tp > 0:
        index = max(amps.values()) / tp
    else:
        index = 0.0
    return ToothAsymmetryReport(
        rotation_frequency=float(f_rot),
        teeth=int(teeth),
        order_amplitudes=amps,
        tooth_pass_amplitude=float(tp),
        asymmetry_index=float(index),
        flagged=bool(index > threshold),
        threshold=float(threshold),
        absent=tuple(absent),
    )
