"""Analysis pipelines behind the CLI commands.

Each ``run_*`` function works on in-memory objects and returns the report
as a plain dict (plus any plot-ready arrays), so the same code path serves
the CLI and the test suite.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from robovib import __version__
from robovib.config import Config, scenario_from_dict
from robovib.envelope import (
    EnvelopeAnalysis,
    analyze_envelope,
    detect_modulation,
    tooth_asymmetry,
)
from robovib.errors import AnalysisError, ConfigError, InvalidInputError
from robovib.modal import (
    LFR,
    ModalPeak,
    ModeTrack,
    classify_band,
    detect_peaks,
    reject_mains,
    stiffness_trend,
    track_modes,
)
from robovib.report import SCHEMA_VERSION
from robovib.rotation import (
    RotationProfile,
    detect_pulses,
    diagnose,
    order_spectrum,
    rotation_frequency,
    SPEED_VARIATION_LIMIT,
)
from robovib.signal_core import Recording, Waterfall, amplitude_spectrum, waterfall
from robovib.synth import AXES, generate

MAX_ORDER = 10


def recording_digest(recording: Recording) -> str:
    """SHA-256 over sample rate, label, channel names and raw sample bytes."""
    h = hashlib.sha256()
    h.update(repr(recording.sample_rate).encode())
    h.update(b"\0" + recording.label.encode("utf-8"))
    for name in sorted(recording.channels):
        h.update(b"\0" + name.encode() + b"\0")
        h.update(np.ascontiguousarray(recording.channels[name], dtype="<f8").tobytes())
    return h.hexdigest()


def _header(command: str, recording: Recording | None, warnings: list[str]) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "tool": "robovib",
        "tool_version": __version__,
        "command": command,
        "warnings": warnings,
    }
    if recording is not None:
        out["input"] = {
            "sha256": recording_digest(recording),
            "label": recording.label,
            "sample_rate_hz": recording.sample_rate,
            "n_samples": recording.n_samples,
        }
    return out


def _axes(recording: Recording) -> list[str]:
    return [a for a in AXES if a in recording.channels]


def _peak_dict(p: ModalPeak) -> dict:
    return {"frequency_hz": p.frequency, "amplitude": p.amplitude, "band": p.band, "origin": p.origin}


def _rotation_dict(profile: RotationProfile) -> dict:
    return {
        "n_pulses": int(profile.pulse_times.size),
        "mean_frequency_hz": profile.mean_frequency,
        "rpm": profile.rpm,
        "speed_variation": profile.speed_variation,
    }


@dataclass
class ImpactResult:
    report: dict
    waterfalls: dict[str, Waterfall] = field(default_factory=dict)


def run_impact(recording: Recording, config: Config = Config()) -> ImpactResult:
    """Waterfall per axis, peaks of the time-averaged spectrum, band classes.

    With a single configuration the mains rule can only test proximity to
    the grid harmonics, so the result is marked provisional; `run_compare`
    re-applies it across configurations.
    """
    wf_cfg = config.waterfall
    if recording.n_samples < wf_cfg.block_size:
        raise AnalysisError(
            f"recording has {recording.n_samples} samples, shorter than one block ({wf_cfg.block_size})"
        )
    label = recording.label
    bands = config.bands.modal
    waterfalls = {}
    peaks = {}
    for axis in _axes(recording):
        wf = waterfall(recording[axis], recording.sample_rate, wf_cfg.block_size, wf_cfg.overlap, wf_cfg.window)
        waterfalls[axis] = wf
        peaks[axis] = detect_peaks(
            wf.mean_spectrum(),
            config.thresholds.peak_floor,
            config.thresholds.prominence,
            axis=axis,
            config=label,
            bands=bands,
        )
    flat = [p for axis in peaks for p in peaks[axis]]
    marked = reject_mains({label: flat}, config.mains.frequency, config.mains.harmonics, config.mains.tol)[label]

    axes_out: dict[str, dict] = {axis: {"peaks": []} for axis in peaks}
    for p in marked:
        axes_out[p.axis]["peaks"].append(_peak_dict(p))
    any_wf = next(iter(waterfalls.values()))
    report = _header("impact", recording, [])
    report.update(
        {
            "waterfall": {
                "block_size": wf_cfg.block_size,
                "overlap": wf_cfg.overlap,
                "window": wf_cfg.window,
                "n_blocks": len(any_wf.spectra),
                "bin_width_hz": any_wf.bin_width,
            },
            "mains": {
                "frequency": config.mains.frequency,
                "harmonics": config.mains.harmonics,
                "tol": config.mains.tol,
                "provisional": True,
            },
            "axes": axes_out,
        }
    )
    return ImpactResult(report, waterfalls)


def waterfall_table(wf: Waterfall) -> tuple[list[str], list[np.ndarray]]:
    """Long-format (time_s, frequency_hz, amplitude) columns."""
    freqs = wf.spectra[0].frequencies
    t = np.repeat(wf.block_times, freqs.size)
    f = np.tile(freqs, len(wf.spectra))
    return ["time_s", "frequency_hz", "amplitude"], [t, f, wf.matrix().ravel()]


def _config_labels(reports: Sequence[dict], names: Sequence[str] | None) -> list[str]:
    labels = [r.get("input", {}).get("label", "") for r in reports]
    if all(labels) and len(set(labels)) == len(labels):
        return labels
    if names is not None and len(set(names)) == len(names):
        return list(names)
    return [f"C{i + 1}" for i in range(len(reports))]


def run_compare(reports: Sequence[dict], config: Config = Config(), names: Sequence[str] | None = None) -> dict:
    """Cross-configuration mains rejection, mode tracking and stiffness trends.

    Configurations are taken in the order given; the first is the stiffness
    reference.  Labels come from the reports, or ``names`` when the report
    labels are missing or repeated.
    """
    if len(reports) < 2:
        raise InvalidInputError("compare needs at least 2 impact reports")
    for r in reports:
        if r.get("command") != "impact":
            raise InvalidInputError(f"compare takes impact reports, got a {r.get('command')!r} report")
    axis_sets = [set(r["axes"]) for r in reports]
    if any(s != axis_sets[0] for s in axis_sets):
        raise InvalidInputError(f"reports do not share axis names: {[sorted(s) for s in axis_sets]}")
    labels = _config_labels(reports, names)
    bands = config.bands.modal

    by_config: dict[str, list[ModalPeak]] = {}
    for label, r in zip(labels, reports):
        by_config[label] = [
            ModalPeak(
                frequency=p["frequency_hz"],
                amplitude=p["amplitude"],
                band=classify_band(p["frequency_hz"], bands),
                axis=axis,
                config=label,
            )
            for axis in sorted(r["axes"])
            for p in r["axes"][axis]["peaks"]
        ]
    marked = reject_mains(by_config, config.mains.frequency, config.mains.harmonics, config.mains.tol)
    tracks = track_modes(marked)

    axes_out: dict[str, dict] = {}
    for axis in sorted(axis_sets[0]):
        axis_tracks = [t for t in tracks if t.axis == axis]
        axes_out[axis] = {
            "peaks": {c: [_peak_dict(p) for p in marked[c] if p.axis == axis] for c in labels},
            "tracks": [_track_dict(t) for t in axis_tracks],
            "stiffness": [_stiffness_dict(i, t, labels) for i, t in enumerate(axis_tracks)],
        }
    report = _header("compare", None, [])
    report.update(
        {
            "configs": labels,
            "inputs": [
                {"label": lab, "sha256": r.get("input", {}).get("sha256", "")} for lab, r in zip(labels, reports)
            ],
            "axes": axes_out,
        }
    )
    return report


def _track_dict(t: ModeTrack) -> dict:
    return {
        "entries": [{"config": e.config, "frequency_hz": e.frequency, "amplitude": e.amplitude} for e in t.entries],
        "trend": t.trend,
        "complete": t.complete,
    }


def _stiffness_dict(index: int, track: ModeTrack, labels: Sequence[str]) -> dict:
    ref = labels[0] if labels[0] in track.configs else track.configs[0]
    st = stiffness_trend(track, ref)
    return {
        "track": index,
        "reference": st.reference,
        "ratios": st.ratios,
        "shifts_pct": st.shifts_pct,
        "verdict": st.verdict,
    }


def _rotation(recording: Recording, config: Config, warnings: list[str]) -> RotationProfile:
    if "tacho" not in recording.channels:
        raise InvalidInputError("this analysis needs a tacho column")
    pulses = detect_pulses(
        recording["tacho"], recording.sample_rate, config.tacho.threshold, config.tacho.hysteresis
    )
    profile = rotation_frequency(pulses)
    if profile.speed_variation > SPEED_VARIATION_LIMIT:
        warnings.append(
            f"rotation speed varies by {profile.speed_variation:.1%} over the record; "
            "order analysis uses the mean frequency"
        )
    return profile


def run_spindle(recording: Recording, config: Config = Config()) -> dict:
    """Order spectrum and defect verdicts per axis, plus the cutting-speed check."""
    warnings: list[str] = []
    profile = _rotation(recording, config, warnings)
    f_rot = profile.mean_frequency
    thresholds = config.thresholds.diagnosis()

    setup_check = None
    setup = config.setup.machining(rpm=profile.rpm)
    if setup is not None:
        check = setup.check_cutting_speed()
        if check is not None:
            setup_check = {
                "computed_m_min": check.computed_m_min,
                "stated_m_min": check.stated_m_min,
                "relative_error": check.relative_error,
                "ok": check.ok,
            }
            if not check.ok:
                warnings.append(
                    f"cutting speed {check.stated_m_min} m/min disagrees with pi*D*n = "
                    f"{check.computed_m_min:.1f} m/min ({check.relative_error:.1%})"
                )

    axes_out = {}
    for axis in _axes(recording):
        spec = amplitude_spectrum(recording[axis], recording.sample_rate, "hann")
        orders = order_spectrum(spec, f_rot, MAX_ORDER)
        flags = diagnose(orders, spec, config.modal_frequencies, thresholds)
        axes_out[axis] = {
            "orders": {str(k): v for k, v in orders.orders.items()},
            "absent_orders": list(orders.absent),
            "defects": {
                "imbalance": flags.imbalance,
                "severity": flags.severity,
                "misalignment": flags.misalignment,
                "ratio": flags.ratio,
                "baseline": flags.baseline,
                "resonance_matches": [
                    {
                        "peak_frequency_hz": m.peak_frequency,
                        "modal_frequency_hz": m.modal_frequency,
                        "separation_hz": m.separation,
                    }
                    for m in flags.resonance_matches
                ],
            },
        }
    report = _header("spindle", recording, warnings)
    report.update(
        {
            "rotation": _rotation_dict(profile),
            "setup_check": setup_check,
            "modal_frequencies": list(config.modal_frequencies),
            "axes": axes_out,
        }
    )
    return report


@dataclass
class MillingResult:
    report: dict
    envelopes: dict[str, EnvelopeAnalysis] = field(default_factory=dict)


def run_milling(recording: Recording, config: Config = Config()) -> MillingResult:
    """Envelope analysis, modulation attribution and tooth asymmetry per axis."""
    teeth = config.setup.teeth
    if teeth is None:
        raise ConfigError("milling analysis needs setup.teeth")
    if teeth < 2:
        raise ConfigError("tooth asymmetry needs setup.teeth >= 2")
    f_lo, f_hi = config.bands.envelope
    if f_hi >= recording.sample_rate / 2:
        raise ConfigError(
            f"envelope band upper edge {f_hi} Hz is not below Nyquist ({recording.sample_rate / 2} Hz)"
        )
    warnings: list[str] = []
    profile = _rotation(recording, config, warnings)
    f_rot = profile.mean_frequency
    f_tp = f_rot * teeth
    if f_hi - f_lo < f_tp:
        warnings.append(
            f"envelope band [{f_lo}, {f_hi}] Hz is narrower than the tooth-pass frequency "
            f"({f_tp:.1f} Hz); the tooth-pass line cannot appear in the envelope"
        )
    lfr_modes = [f for f in config.modal_frequencies if classify_band(f, config.bands.modal) == LFR]

    envelopes = {}
    axes_out = {}
    for axis in _axes(recording):
        env = analyze_envelope(recording[axis], recording.sample_rate, (f_lo, f_hi), axis)
        spec = env.envelope_spectrum
        envelopes[axis] = env
        if spec.bin_width > 1.0:
            msg = f"{axis}: envelope bin width {spec.bin_width:.2f} Hz exceeds 1 Hz; record is short"
            if msg not in warnings:
                warnings.append(msg)
        tol = max(spec.bin_width, 0.5)
        mods = detect_modulation(
            spec, f_rot, lfr_modes, tol, config.thresholds.peak_floor, config.thresholds.prominence
        )
        asym = tooth_asymmetry(spec, f_rot, teeth, threshold=config.thresholds.asymmetry,
                               floor_factor=config.thresholds.peak_floor)
        axes_out[axis] = {
            "modulation": [
                {"frequency_hz": m.frequency, "amplitude": m.amplitude, "attribution": m.attribution, "order": m.order}
                for m in mods
            ],
            "tooth_asymmetry": {
                "order_amplitudes": {str(k): v for k, v in asym.order_amplitudes.items()},
                "tooth_pass_amplitude": asym.tooth_pass_amplitude,
                "asymmetry_index": asym.asymmetry_index,
                "flagged": asym.flagged,
                "threshold": asym.threshold,
            },
            "envelope_mean": float(env.envelope.mean()),
            "envelope_bin_width_hz": spec.bin_width,
        }
    report = _header("milling", recording, warnings)
    report.update(
        {
            "rotation": _rotation_dict(profile),
            "band": [f_lo, f_hi],
            "teeth": int(teeth),
            "tooth_pass_frequency_hz": f_tp,
            "axes": axes_out,
        }
    )
    return MillingResult(report, envelopes)


def run_synth(config: Config) -> Recording:
    if config.scenario is None:
        raise ConfigError("synth needs a 'scenario' section in the configuration")
    return generate(scenario_from_dict(config.scenario))
