"""Synthetic recordings with exactly known spectral content.

These generators stand in for measured data: damped modal ringdowns for
impact tests, harmonic rotor vibration, resonance-filtered tooth-impact
trains for milling, and once-per-revolution tachometer pulses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import numpy.typing as npt

from robovib.errors import ConfigError, InvalidInputError
from robovib.signal_core import Recording

FloatArray = npt.NDArray[np.float64]

AXES = ("ax", "ay", "az")

# an impact's ringdown is dropped once its decay factor falls below e**-40
_RINGDOWN_HORIZON = 40.0


@dataclass(frozen=True)
class Mode:
    frequency: float
    damping: float = 0.0
    amplitude: float = 1.0


@dataclass(frozen=True)
class ModalModel:
    modes: tuple[Mode, ...]

    @classmethod
    def of(cls, *modes: Sequence[float]) -> "ModalModel":
        """Build from ``(frequency, damping, amplitude)`` tuples."""
        return cls(tuple(Mode(*m) for m in modes))


@dataclass(frozen=True)
class RotorModel:
    rotation_frequency: float
    amplitudes: Mapping[int, float] = field(default_factory=dict)
    phases: Mapping[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class MillingModel:
    rotation_frequency: float
    teeth: int
    gains: tuple[float, ...] | None = None
    resonance: tuple[float, float] = (2500.0, 0.05)
    modulation: tuple[float, float] = (0.0, 0.0)

    def tooth_gains(self) -> FloatArray:
        g = np.ones(self.teeth) if self.gains is None else np.asarray(self.gains, dtype=np.float64)
        if g.size != self.teeth:
            raise ConfigError(f"expected {self.teeth} tooth gains, got {g.size}")
        if np.any(g < 0):
            raise ConfigError("tooth gains must be non-negative")
        return g


def _time(sample_rate: float, duration: float) -> FloatArray:
    if not sample_rate > 0:
        raise ConfigError("sample_rate must be positive")
    n = int(round(duration * sample_rate))
    if n < 2:
        raise ConfigError(f"duration {duration} s at {sample_rate} Hz gives fewer than 2 samples")
    return np.arange(n) / sample_rate


def ringdown(frequency: float, damping: float, t: FloatArray) -> FloatArray:
    """Unit-amplitude free response exp(-zeta*w*t) * sin(w_d*t), zero for t < 0."""
    w = 2.0 * np.pi * frequency
    wd = w * math.sqrt(1.0 - damping**2)
    out = np.exp(-damping * w * t) * np.sin(wd * t)
    return np.where(t >= 0, out, 0.0)


def modal_impulse(model: ModalModel, sample_rate: float, duration: float) -> FloatArray:
    """Superposed modal ringdowns starting at t = 0."""
    t = _time(sample_rate, duration)
    x = np.zeros_like(t)
    for m in model.modes:
        if not 0 <= m.damping < 1:
            raise ConfigError(f"damping ratio must be in [0, 1), got {m.damping}")
        if not 0 < m.frequency < sample_rate / 2:
            raise ConfigError(f"mode {m.frequency} Hz is not below Nyquist ({sample_rate / 2} Hz)")
        x += m.amplitude * ringdown(m.frequency, m.damping, t)
    return x


def rotor_signal(model: RotorModel, sample_rate: float, duration: float) -> FloatArray:
    """Sum of rotation harmonics a_k * sin(2*pi*k*f_rot*t + phi_k)."""
    t = _time(sample_rate, duration)
    x = np.zeros_like(t)
    for k, a in sorted(model.amplitudes.items()):
        k = int(k)
        if k < 1:
            raise ConfigError(f"order must be >= 1, got {k}")
        f = k * model.rotation_frequency
        if not f < sample_rate / 2:
            raise ConfigError(f"order {k} ({f} Hz) is not below Nyquist")
        x += a * np.sin(2.0 * np.pi * f * t + model.phases.get(k, 0.0))
    return x


def milling_signal(model: MillingModel, sample_rate: float, duration: float) -> FloatArray:
    """Steady-state tooth-impact train through a single resonance.

    Tooth ``j`` strikes at ``j / (teeth * f_rot)`` with gain
    ``gains[j mod teeth]`` and excites a unit ringdown of the resonance.
    Impacts before t = 0 are included until their ringdown has decayed, so
    the record starts in steady state; impacts at or after ``duration`` are
    dropped.  The train is then multiplied by ``1 + depth*cos(2*pi*f_mod*t)``.

    When ``sample_rate * period`` is an integer and the record spans whole
    revolutions, the sampled signal is exactly periodic.
    """
    t = _time(sample_rate, duration)
    f_res, zeta = model.resonance
    if not 0 < f_res < sample_rate / 2:
        raise ConfigError(f"resonance {f_res} Hz is not below Nyquist")
    if not 0 < zeta < 1:
        raise ConfigError("resonance damping must be in (0, 1)")
    if model.teeth < 1 or not model.rotation_frequency > 0:
        raise ConfigError("need teeth >= 1 and a positive rotation frequency")
    f_mod, depth = model.modulation
    if not 0 <= depth < 1:
        raise ConfigError(f"modulation depth must be in [0, 1), got {depth}")
    gains = model.tooth_gains()

    period = 1.0 / (model.teeth * model.rotation_frequency)
    decay = zeta * 2.0 * np.pi * f_res
    horizon = _RINGDOWN_HORIZON / decay
    span = int(math.ceil(horizon * sample_rate)) + 1
    n = t.size
    x = np.zeros(n)
    j_first = -int(math.ceil(horizon / period))
    j_last = int(math.ceil(n / sample_rate / period))
    for j in range(j_first, j_last + 1):
        tj = j * period
        if tj >= n / sample_rate:
            break
        n0 = max(0, int(math.ceil(tj * sample_rate - 1e-9)))
        n1 = min(n, int(math.floor((tj + horizon) * sample_rate)) + 1, n0 + span)
        if n1 <= n0:
            continue
        x[n0:n1] += gains[j % model.teeth] * ringdown(f_res, zeta, t[n0:n1] - tj)
    if depth:
        x *= 1.0 + depth * np.cos(2.0 * np.pi * f_mod * t)
    return x


def tacho_pulses(
    f_rot: float, sample_rate: float, duration: float, duty: float = 0.5
) -> FloatArray:
    """Unit rectangular pulse train, one pulse per revolution.

    Each revolution ``[kT, (k+1)T)`` is low first and high for its last
    ``duty * T``, so the record opens low and every rising edge falls inside
    it.  Each sample holds the high fraction of a two-sample-wide window
    around it, so the samples straddling an edge both lie on a linear ramp
    and the 0.5 crossing interpolates exactly onto the edge.
    """
    if not 0 < duty < 1:
        raise ConfigError(f"duty must be in (0, 1), got {duty}")
    if not 0 < f_rot < sample_rate / 4:
        raise ConfigError(f"rotation frequency must be below sample_rate/4 ({sample_rate / 4} Hz)")
    t = _time(sample_rate, duration)
    period = 1.0 / f_rot
    half = 1.0 / sample_rate

    def high_time(s: FloatArray) -> FloatArray:
        k = np.floor(s / period)
        r = s - k * period
        return k * duty * period + np.clip(r - (1.0 - duty) * period, 0.0, duty * period)

    # clamp at 0 so the first sample does not see revolution -1
    return (high_time(t + half) - high_time(np.maximum(t - half, 0.0))) * sample_rate / 2.0


def mix_and_noise(
    components: Sequence[npt.ArrayLike], noise_sd: float = 0.0, seed: int | Sequence[int] = 0
) -> FloatArray:
    """Elementwise sum plus seeded Gaussian noise."""
    if not components:
        raise InvalidInputError("need at least one component")
    arrays = [np.asarray(c, dtype=np.float64) for c in components]
    if len({a.shape for a in arrays}) != 1:
        raise InvalidInputError(f"component lengths differ: {[a.size for a in arrays]}")
    if noise_sd < 0:
        raise ConfigError("noise_sd must be non-negative")
    out = np.sum(arrays, axis=0)
    if noise_sd > 0:
        rng = np.random.default_rng(seed)
        out = out + rng.normal(0.0, noise_sd, size=out.shape)
    return out


@dataclass(frozen=True)
class SynthScenario:
    """A full recording description.

    ``channels`` maps an axis name to a list of components (ModalModel,
    RotorModel or MillingModel).  Axes from ``AXES`` without components are
    generated as zeros.  ``tacho`` is ``(f_rot, duty)`` or None.
    """

    sample_rate: float
    duration: float
    channels: Mapping[str, Sequence[ModalModel | RotorModel | MillingModel]] = field(default_factory=dict)
    noise_sd: float = 0.0
    seed: int = 0
    label: str = ""
    tacho: tuple[float, float] | None = None


def _component(model, sample_rate: float, duration: float) -> FloatArray:
    if isinstance(model, ModalModel):
        return modal_impulse(model, sample_rate, duration)
    if isinstance(model, RotorModel):
        return rotor_signal(model, sample_rate, duration)
    if isinstance(model, MillingModel):
        return milling_signal(model, sample_rate, duration)
    raise ConfigError(f"unknown component {type(model).__name__}")


def generate(scenario: SynthScenario) -> Recording:
    """Render a scenario; noise on each axis uses the stream ``(seed, axis index)``."""
    fs, dur = scenario.sample_rate, scenario.duration
    t = _time(fs, dur)
    unknown = set(scenario.channels) - set(AXES)
    if unknown:
        raise ConfigError(f"unknown channel(s) {sorted(unknown)}; expected {AXES}")
    channels = {}
    for i, axis in enumerate(AXES):
        parts = [_component(m, fs, dur) for m in scenario.channels.get(axis, ())]
        channels[axis] = mix_and_noise(parts or [np.zeros_like(t)], scenario.noise_sd, (scenario.seed, i))
    if scenario.tacho is not None:
        f_rot, duty = scenario.tacho
        channels["tacho"] = tacho_pulses(f_rot, fs, dur, duty)
    return Recording(scenario.label, fs, channels)
