"""Self-excited frequency identification from impact spectra.

Peak picking, LFR/HFR band classification, electrical-grid line
dissociation across configurations, mode tracking and frequency-shift
stiffness trends.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.signal import find_peaks

from robovib.errors import ConfigError, InvalidInputError
from robovib.signal_core import Spectrum

LFR = "LFR"
HFR = "HFR"
OUT_OF_BAND = "OutOfBand"

STRUCTURAL = "structural"
EXTERNAL = "external"

INCREASING = "increasing"
DECREASING = "decreasing"
FLAT = "flat"

# fraction of the start frequency each step must move to count as a trend
TREND_DEADBAND = 0.01


@dataclass(frozen=True)
class BandConfig:
    lfr: tuple[float, float] = (0.0, 250.0)
    hfr: tuple[float, float] = (1200.0, 3600.0)

    def __post_init__(self):
        (a, b), (c, d) = self.lfr, self.hfr
        if not (0 <= a < b < c < d):
            raise ConfigError(f"bands must satisfy 0 <= lfr_lo < lfr_hi < hfr_lo < hfr_hi, got {self.lfr}, {self.hfr}")


DEFAULT_BANDS = BandConfig()


@dataclass(frozen=True)
class ModalPeak:
    frequency: float
    amplitude: float
    band: str = OUT_OF_BAND
    axis: str = ""
    config: str = ""
    origin: str = STRUCTURAL

    def __post_init__(self):
        if self.frequency < 0 or self.amplitude < 0:
            raise InvalidInputError("peak frequency and amplitude must be non-negative")


@dataclass(frozen=True)
class TrackEntry:
    config: str
    frequency: float
    amplitude: float


@dataclass(frozen=True)
class ModeTrack:
    axis: str
    entries: tuple[TrackEntry, ...]
    complete: bool = True

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if len(self.entries) < 2:
            raise InvalidInputError("a mode track needs at least 2 entries")

    @property
    def frequencies(self) -> list[float]:
        return [e.frequency for e in self.entries]

    @property
    def configs(self) -> list[str]:
        return [e.config for e in self.entries]

    @property
    def trend(self) -> str:
        f = self.frequencies
        step = TREND_DEADBAND * f[0]
        diffs = np.diff(f)
        if np.all(diffs > step):
            return INCREASING
        if np.all(diffs < -step):
            return DECREASING
        return FLAT


@dataclass(frozen=True)
class StiffnessTrend:
    """Relative stiffness across configurations, read from one mode track.

    Under constant modal mass the natural frequency scales with the square
    root of stiffness, so ``ratio = (f / f_ref) ** 2``.
    """

    axis: str
    reference: str
    ratios: dict[str, float]
    shifts_pct: dict[str, float]
    verdict: str


# lower bound on the floor relative to the spectrum maximum; far above
# float64 FFT round-off, far below any measured noise floor
RELATIVE_FLOOR = 1e-10


def noise_floor(amplitudes: np.ndarray) -> float:
    """Median plus median absolute deviation."""
    a = np.asarray(amplitudes, dtype=np.float64)
    med = float(np.median(a))
    return med + float(np.median(np.abs(a - med)))


def effective_floor(amplitudes: np.ndarray) -> float:
    """`noise_floor`, but never below RELATIVE_FLOOR times the maximum.

    Without the bound, a noise-free synthetic spectrum has a floor at
    round-off level and every round-off ripple becomes a peak.
    """
    a = np.asarray(amplitudes, dtype=np.float64)
    return max(noise_floor(a), RELATIVE_FLOOR * float(a.max()))


def _refine(a: np.ndarray, i: int) -> float:
    """Fractional bin offset of a peak from a parabola through 3 bins.

    The parabola is fitted to log amplitudes when all three are positive,
    which removes most of the window-shape bias; otherwise to amplitudes.
    """
    if i <= 0 or i >= a.size - 1:
        return 0.0
    y = a[i - 1 : i + 2]
    if np.all(y > 0):
        y = np.log(y)
    denom = y[0] - 2.0 * y[1] + y[2]
    if denom >= 0:
        return 0.0
    return float(np.clip(0.5 * (y[0] - y[2]) / denom, -0.5, 0.5))


def detect_peaks(
    spectrum: Spectrum,
    floor_factor: float = 5.0,
    min_prominence: float = 0.1,
    axis: str = "",
    config: str = "",
    bands: BandConfig = DEFAULT_BANDS,
) -> list[ModalPeak]:
    """Local maxima standing out from the median+MAD noise floor.

    A peak is kept when its amplitude exceeds ``floor_factor`` times the
    floor (`effective_floor`) and its prominence (height above the higher
    of its two bounding valleys) exceeds ``min_prominence`` times its own
    amplitude.
    Frequencies are refined by 3-bin parabolic interpolation.  Results are
    sorted by descending amplitude.
    """
    if floor_factor < 1:
        raise ConfigError(f"floor_factor must be >= 1, got {floor_factor}")
    if not 0 <= min_prominence < 1:
        raise ConfigError(f"min_prominence must be in [0, 1), got {min_prominence}")
    a = spectrum.amplitudes
    floor = floor_factor * effective_floor(a)
    idx, props = find_peaks(a, prominence=0.0)
    keep = (a[idx] > floor) & (props["prominences"] > min_prominence * a[idx])
    peaks = []
    for i in idx[keep]:
        f = (i + _refine(a, int(i))) * spectrum.bin_width
        peaks.append(
            ModalPeak(
                frequency=float(f),
                amplitude=float(a[i]),
                band=classify_band(f, bands),
                axis=axis,
                config=config,
            )
        )
    peaks.sort(key=lambda p: (-p.amplitude, p.frequency))
    return peaks


def classify_band(frequency: float, bands: BandConfig = DEFAULT_BANDS) -> str:
    """LFR, HFR or OutOfBand; band edges are inclusive."""
    if frequency < 0:
        raise InvalidInputError(f"frequency must be non-negative, got {frequency}")
    if bands.lfr[0] <= frequency <= bands.lfr[1]:
        return LFR
    if bands.hfr[0] <= frequency <= bands.hfr[1]:
        return HFR
    return OUT_OF_BAND


def reject_mains(
    peaks_by_config: Mapping[str, Sequence[ModalPeak]],
    mains: float = 50.0,
    n_harmonics: int = 2,
    tol: float = 0.5,
) -> dict[str, list[ModalPeak]]:
    """Mark electrical-grid lines as external.

    For each axis and harmonic ``k * mains``, a configuration's candidate is
    its single peak nearest the harmonic, provided it lies within ``tol``.
    Candidates are marked external only when every configuration has one,
    since a grid line does not move with the robot pose while structural
    modes do.  Everything else is marked structural.
    """
    if tol <= 0:
        raise ConfigError(f"mains tolerance must be positive, got {tol}")
    if mains <= 0 or n_harmonics < 1:
        raise ConfigError("mains frequency must be positive and n_harmonics >= 1")
    if not peaks_by_config:
        raise InvalidInputError("need at least one configuration")

    configs = list(peaks_by_config)
    axes = sorted({p.axis for ps in peaks_by_config.values() for p in ps})
    external: set[tuple[str, int]] = set()  # (config, index)
    for axis in axes:
        for k in range(1, n_harmonics + 1):
            target = k * mains
            chosen = []
            for c in configs:
                near = [
                    (abs(p.frequency - target), i)
                    for i, p in enumerate(peaks_by_config[c])
                    if p.axis == axis and abs(p.frequency - target) <= tol
                ]
                if not near:
                    break
                chosen.append((c, min(near)[1]))
            else:
                external.update(chosen)

    return {
        c: [
            dataclasses.replace(p, origin=EXTERNAL if (c, i) in external else STRUCTURAL)
            for i, p in enumerate(peaks_by_config[c])
        ]
        for c in configs
    }


def default_match_tol(frequency: float) -> float:
    """5 Hz in the LFR, 2 % of frequency above it (the two agree at 250 Hz)."""
    return max(5.0, 0.02 * frequency)


def track_modes(
    peaks_by_config: Mapping[str, Sequence[ModalPeak]],
    match_tol: float | Callable[[float], float] | None = None,
) -> list[ModeTrack]:
    """Follow modes from one configuration to the next.

    Configurations are taken in mapping order.  At each step the globally
    nearest (track end, peak) pair within tolerance is matched first, then
    the next nearest, never reusing a peak.  Unmatched peaks start new
    tracks.  Tracks with fewer entries than configurations are returned with
    ``complete=False``; single-entry chains are dropped.  External peaks
    are ignored.
    """
    configs = list(peaks_by_config)
    if len(configs) < 2:
        raise InvalidInputError("mode tracking needs at least 2 configurations")
    if match_tol is None:
        tol_of = default_match_tol
    elif callable(match_tol):
        tol_of = match_tol
    else:
        tol_of = lambda f, _t=float(match_tol): _t  # noqa: E731

    axes = sorted({p.axis for ps in peaks_by_config.values() for p in ps})
    tracks: list[ModeTrack] = []
    for axis in axes:
        chains: list[list[TrackEntry]] = []
        open_chains: list[int] = []
        for c in configs:
            peaks = sorted(
                (p for p in peaks_by_config[c] if p.axis == axis and p.origin == STRUCTURAL),
                key=lambda p: p.frequency,
            )
            pairs = []
            for ci in open_chains:
                last = chains[ci][-1].frequency
                for pi, p in enumerate(peaks):
                    d = abs(p.frequency - last)
                    if d <= tol_of(last):
                        pairs.append((d, last, ci, pi))
            pairs.sort()
            used_c: set[int] = set()
            used_p: set[int] = set()
            for _, _, ci, pi in pairs:
                if ci in used_c or pi in used_p:
                    continue
                used_c.add(ci)
                used_p.add(pi)
                p = peaks[pi]
                chains[ci].append(TrackEntry(c, p.frequency, p.amplitude))
            next_open = sorted(used_c)
            for pi, p in enumerate(peaks):
                if pi not in used_p:
                    chains.append([TrackEntry(c, p.frequency, p.amplitude)])
                    next_open.append(len(chains) - 1)
            open_chains = next_open
        for chain in sorted(chains, key=lambda ch: (configs.index(ch[0].config), ch[0].frequency)):
            if len(chain) >= 2:
                tracks.append(ModeTrack(axis, tuple(chain), complete=len(chain) == len(configs)))
    return tracks


_VERDICT = {INCREASING: "increase", DECREASING: "decrease", FLAT: "flat"}


def stiffness_trend(track: ModeTrack, reference: str | None = None) -> StiffnessTrend:
    """Stiffness ratios and frequency shifts relative to one configuration."""
    if reference is None:
        reference = track.entries[0].config
    by_config = {e.config: e.frequency for e in track.entries}
    if reference not in by_config:
        raise InvalidInputError(f"reference {reference!r} is not in the track ({list(by_config)})")
    f_ref = by_config[reference]
    if f_ref <= 0:
        raise InvalidInputError("reference frequency must be positive")
    ratios = {c: 1.0 if c == reference else (f / f_ref) ** 2 for c, f in by_config.items()}
    shifts = {c: 0.0 if c == reference else (f - f_ref) / f_ref * 100.0 for c, f in by_config.items()}
    return StiffnessTrend(track.axis, reference, ratios, shifts, _VERDICT[track.trend])


def peaks_to_configs(peaks: Iterable[ModalPeak]) -> dict[str, list[ModalPeak]]:
    """Group a flat peak list by configuration label, keeping first-seen order."""
    out: dict[str, list[ModalPeak]] = {}
    for p in peaks:
        out.setdefault(p.config, []).append(p)
    return out
