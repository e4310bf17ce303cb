"""Rotation-synchronized diagnosis of the spindle.

Tachometer pulse extraction, rotation speed, order spectra and
imbalance / misalignment / resonance-coincidence verdicts.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import numpy.typing as npt

from robovib.errors import ConfigError, InsufficientDataError, InvalidInputError, NoPulsesError
from robovib.modal import detect_peaks, effective_floor
from robovib.signal_core import Spectrum

# instantaneous speed spread above which order analysis is approximate
SPEED_VARIATION_LIMIT = 0.02
CUTTING_SPEED_TOL = 0.01


class SpeedVariationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CuttingSpeedCheck:
    computed_m_min: float
    stated_m_min: float
    relative_error: float

    @property
    def ok(self) -> bool:
        return self.relative_error <= CUTTING_SPEED_TOL


@dataclass(frozen=True)
class MachiningSetup:
    """Spindle and tool parameters.

    Attributes
    ----------
    spindle_speed : float
        rpm.
    teeth : int
    tool_diameter : float
        mm.
    cutting_speed : float, optional
        m/min, checked against pi * D * n by :meth:`check_cutting_speed`.
    feed_rate : float, optional
        mm/min, metadata only.
    """

    spindle_speed: float
    teeth: int = 1
    tool_diameter: float | None = None
    cutting_speed: float | None = None
    feed_rate: float | None = None

    def __post_init__(self):
        if not self.spindle_speed > 0:
            raise ConfigError(f"spindle_speed must be positive, got {self.spindle_speed}")
        if int(self.teeth) != self.teeth or self.teeth < 1:
            raise ConfigError(f"teeth must be a positive integer, got {self.teeth}")
        if self.tool_diameter is not None and not self.tool_diameter > 0:
            raise ConfigError("tool_diameter must be positive")
        if self.cutting_speed is not None and not self.cutting_speed > 0:
            raise ConfigError("cutting_speed must be positive")

    @property
    def rotation_frequency(self) -> float:
        return self.spindle_speed / 60.0

    def check_cutting_speed(self) -> CuttingSpeedCheck | None:
        """Compare pi*D*n with the stated cutting speed; None if either is missing."""
        if self.cutting_speed is None or self.tool_diameter is None:
            return None
        computed = math.pi * (self.tool_diameter / 1000.0) * self.spindle_speed
        err = abs(computed - self.cutting_speed) / self.cutting_speed
        return CuttingSpeedCheck(computed, float(self.cutting_speed), err)


@dataclass(frozen=True)
class RotationProfile:
    pulse_times: npt.NDArray[np.float64] = field(repr=False)
    mean_frequency: float
    instantaneous_frequency: npt.NDArray[np.float64] = field(repr=False)

    @property
    def rpm(self) -> float:
        return 60.0 * self.mean_frequency

    @property
    def speed_variation(self) -> float:
        """Spread of instantaneous frequency relative to the mean."""
        f = self.instantaneous_frequency
        return float((f.max() - f.min()) / self.mean_frequency)


@dataclass(frozen=True)
class OrderSpectrum:
    rotation_frequency: float
    orders: dict[int, float]
    max_order: int
    absent: tuple[int, ...] = ()

    def amplitude(self, k: int) -> float:
        """Order amplitude; 0 for orders above Nyquist."""
        return self.orders.get(k, 0.0)


@dataclass(frozen=True)
class ResonanceMatch:
    peak_frequency: float
    modal_frequency: float
    separation: float


@dataclass(frozen=True)
class DiagnosisThresholds:
    imbalance_factor: float = 5.0
    misalignment_ratio: float = 0.5
    resonance_tol_pct: float = 2.0
    resonance_tol_min: float = 5.0
    peak_floor: float = 5.0
    prominence: float = 0.1

    def resonance_tol(self, frequency: float) -> float:
        return max(self.resonance_tol_pct / 100.0 * frequency, self.resonance_tol_min)


@dataclass(frozen=True)
class DefectFlags:
    imbalance: bool
    severity: float
    misalignment: bool
    ratio: float
    resonance_matches: tuple[ResonanceMatch, ...] = ()
    baseline: float = 0.0


def detect_pulses(
    tacho: npt.ArrayLike,
    sample_rate: float,
    threshold: float = 0.5,
    hysteresis: float = 0.1,
) -> npt.NDArray[np.float64]:
    """Rising-edge times of a once-per-revolution tachometer signal.

    The signal is normalized to its range.  An edge fires when the signal
    reaches ``threshold`` after having been below ``threshold - hysteresis``;
    the crossing instant is linearly interpolated between samples.
    """
    if not 0 < hysteresis < threshold < 1:
        raise ConfigError("need 0 < hysteresis < threshold < 1")
    x = np.asarray(tacho, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise InvalidInputError("tachometer signal needs at least 2 samples")
    lo, hi = float(x.min()), float(x.max())
    if not hi > lo:
        raise NoPulsesError("tachometer signal is constant")
    u = (x - lo) / (hi - lo)

    state = np.zeros(u.size, dtype=np.int8)
    state[u < threshold - hysteresis] = -1
    state[u >= threshold] = 1
    idx = np.flatnonzero(state)
    s = state[idx]
    fire = idx[1:][(s[1:] == 1) & (s[:-1] == -1)]
    if fire.size == 0:
        raise NoPulsesError("no rising edges found in tachometer signal")
    # samples between the arming and firing sample sit inside the hysteresis
    # band, so u[i-1] < threshold <= u[i]
    u0, u1 = u[fire - 1], u[fire]
    frac = (threshold - u0) / (u1 - u0)
    return (fire - 1 + frac) / float(sample_rate)


def rotation_frequency(pulses: Sequence[float] | npt.ArrayLike) -> RotationProfile:
    """Mean and per-revolution rotation frequency from pulse times."""
    t = np.asarray(pulses, dtype=np.float64)
    if t.size < 2:
        raise InsufficientDataError(f"need at least 2 pulses, got {t.size}")
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise InvalidInputError("pulse times must be strictly increasing")
    mean = (t.size - 1) / (t[-1] - t[0])
    return RotationProfile(t, float(mean), 1.0 / dt)


def tooth_pass_frequency(setup: MachiningSetup) -> float:
    return setup.spindle_speed / 60.0 * setup.teeth


def default_order_tol(spectrum: Spectrum, frequency: float) -> float:
    return max(spectrum.bin_width, 0.01 * frequency)


def order_amplitude(spectrum: Spectrum, frequency: float, tol: float) -> float:
    """Largest amplitude within ``frequency +/- tol``; 0 if no bin falls inside."""
    a = spectrum.amplitudes
    lo = max(0, math.ceil((frequency - tol) / spectrum.bin_width - 1e-9))
    hi = min(a.size - 1, math.floor((frequency + tol) / spectrum.bin_width + 1e-9))
    if hi < lo:
        return 0.0
    return float(a[lo : hi + 1].max())


def order_spectrum(
    spectrum: Spectrum,
    f_rot: float,
    max_order: int = 10,
    tol: float | None = None,
) -> OrderSpectrum:
    """Amplitudes at integer multiples of the rotation frequency.

    ``tol`` defaults per order to max(bin_width, 1 % of k*f_rot).  Orders
    above the spectrum's last bin are listed in ``absent``.
    """
    if not f_rot > 0:
        raise ConfigError(f"rotation frequency must be positive, got {f_rot}")
    if max_order < 1:
        raise ConfigError("max_order must be >= 1")
    if tol is not None and tol < spectrum.bin_width / 2:
        raise ConfigError(f"tol {tol} Hz is below half a bin ({spectrum.bin_width / 2} Hz)")
    orders: dict[int, float] = {}
    absent = []
    for k in range(1, max_order + 1):
        f = k * f_rot
        if f > spectrum.max_frequency:
            absent.append(k)
            continue
        w = default_order_tol(spectrum, f) if tol is None else tol
        orders[k] = order_amplitude(spectrum, f, w)
    return OrderSpectrum(float(f_rot), orders, int(max_order), tuple(absent))


def diagnose(
    order_spec: OrderSpectrum,
    spectrum: Spectrum,
    modal_frequencies: Sequence[float] = (),
    thresholds: DiagnosisThresholds = DiagnosisThresholds(),
) -> DefectFlags:
    """Imbalance, misalignment and resonance-coincidence verdicts.

    Imbalance: order 1 exceeds ``imbalance_factor`` times the broadband
    baseline (median + MAD of the spectrum, bounded below by
    `effective_floor`).  Misalignment: imbalance-level order 1 and A2/A1
    above ``misalignment_ratio``.  Resonance matches: every
    detected spectral peak within tolerance of a supplied modal frequency.
    """
    if 1 not in order_spec.orders or 2 not in order_spec.orders:
        raise InvalidInputError("order spectrum must contain orders 1 and 2")
    a1, a2 = order_spec.orders[1], order_spec.orders[2]
    # the relative bound keeps severity finite on noise-free synthetic spectra
    baseline = effective_floor(spectrum.amplitudes)
    severity = a1 / baseline if baseline > 0 else 0.0
    imbalance = baseline > 0 and a1 > thresholds.imbalance_factor * baseline
    ratio = a2 / a1 if a1 > 0 else 0.0
    misalignment = imbalance and ratio > thresholds.misalignment_ratio

    matches = []
    if len(modal_frequencies):
        for p in detect_peaks(spectrum, thresholds.peak_floor, thresholds.prominence):
            for fm in modal_frequencies:
                sep = abs(p.frequency - fm)
                if sep <= thresholds.resonance_tol(fm):
                    matches.append(ResonanceMatch(p.frequency, float(fm), sep))
    matches.sort(key=lambda m: (m.modal_frequency, m.separation))
    return DefectFlags(
        imbalance=bool(imbalance),
        severity=float(severity),
        misalignment=bool(misalignment),
        ratio=float(ratio),
        resonance_matches=tuple(matches),
        baseline=float(baseline),
    )


def warn_on_speed_variation(profile: RotationProfile) -> str | None:
    if profile.speed_variation > SPEED_VARIATION_LIMIT:
        msg = (
            f"rotation speed varies by {profile.speed_variation:.1%} over the record; "
            "order analysis uses the mean frequency"
        )
        warnings.warn(msg, SpeedVariationWarning, stacklevel=2)
        return msg
    return None
