"""Worked examples with hand-computable or synthesised expected values."""

import numpy as np
import pytest

from conftest import F_ROT, impact_recording, milling_recording, rotor_recording
from robovib.commands import run_compare, run_impact, run_milling, run_spindle
from robovib.config import config_from_dict
from robovib.envelope import (
    ROTATION_HARMONIC,
    STRUCTURAL,
    EnvelopeAnalysis,
    analyze_envelope,
    detect_modulation,
    envelope_signal,
    envelope_spectrum,
)
from robovib.modal import EXTERNAL, OUT_OF_BAND, ModalPeak, classify_band, detect_peaks, reject_mains
from robovib.rotation import detect_pulses, diagnose, order_spectrum, rotation_frequency
from robovib.signal_core import Recording, Spectrum, amplitude_spectrum
from robovib.synth import ModalModel, RotorModel, SynthScenario, generate, modal_impulse, rotor_signal, tacho_pulses

FS = 25000.0


def t_axis(fs, seconds):
    return np.arange(int(fs * seconds)) / fs


class TestSpectralExamples:
    def test_constant_spectrum_no_peaks(self):
        assert detect_peaks(Spectrum(1.0, np.full(100, 3.0))) == []

    def test_800hz_out_of_band(self):
        assert classify_band(800) == OUT_OF_BAND

    def test_mains_50_1_and_100_2(self):
        cfgs = {c: [ModalPeak(50.1, 1, config=c), ModalPeak(100.2, 1, config=c)] for c in ("P1", "P2", "P3")}
        assert all(p.origin == EXTERNAL for ps in reject_mains(cfgs).values() for p in ps)

    def test_resonance_479_vs_480(self):
        a = np.full(1001, 1e-3)
        a[479] = 1.0
        a[100] = 2.0  # order 1 at f_rot = 100 Hz
        spec = Spectrum(1.0, a)
        flags = diagnose(order_spectrum(spec, 100.0), spec, [480.0])
        (m,) = flags.resonance_matches
        assert m.modal_frequency == 480.0 and m.separation == pytest.approx(1.0)

    def test_in_bin_orders(self):
        x = rotor_signal(RotorModel(10.0, {1: 1.0, 2: 0.6}), 1000.0, 1.0)
        os_ = order_spectrum(amplitude_spectrum(x, 1000.0, "hann"), 10.0, 5)
        assert os_.amplitude(1) == pytest.approx(1.0, abs=1e-9)
        assert os_.amplitude(2) == pytest.approx(0.6, abs=1e-9)
        assert os_.amplitude(3) < 1e-9

    def test_zero_signal_orders(self):
        os_ = order_spectrum(amplitude_spectrum(np.zeros(1000), 1000.0), 10.0, 5)
        assert all(v == 0 for v in os_.orders.values())

    def test_order_1_off_bin(self):
        rec = rotor_recording({1: 1.0}, noise=0.0)
        os_ = order_spectrum(amplitude_spectrum(rec["ax"], FS, "hann"), F_ROT)
        assert os_.amplitude(1) == pytest.approx(1.0, rel=0.02)


class TestEnvelopeExamples:
    def test_pure_carrier(self):
        t = t_axis(FS, 1.0)
        env = envelope_signal(np.cos(2 * np.pi * 2500 * t), FS).envelope
        inner = slice(int(0.05 * t.size), int(0.95 * t.size))
        assert np.max(np.abs(env[inner] - 1)) < 1e-3

    def test_out_of_band_sine(self):
        t = t_axis(FS, 1.0)
        assert envelope_signal(np.sin(2 * np.pi * 100 * t), FS).envelope.max() < 1e-6

    def test_constant_envelope_zero_spectrum(self):
        t = t_axis(FS, 1.0)
        spec = analyze_envelope(np.cos(2 * np.pi * 2500 * t), FS).envelope_spectrum
        assert spec.amplitudes.max() < 1e-6

    def test_two_modulations(self):
        t = t_axis(FS, 2.0)
        env = 1 + 0.5 * np.cos(2 * np.pi * 9 * t) + 0.2 * np.cos(2 * np.pi * F_ROT * t)
        peaks = detect_peaks(envelope_spectrum(EnvelopeAnalysis(FS, (2000, 3000), env)))
        assert len(peaks) == 2
        assert peaks[0].frequency == pytest.approx(9.0, abs=0.1) and peaks[0].amplitude == pytest.approx(0.5, abs=0.01)
        assert peaks[1].frequency == pytest.approx(F_ROT, abs=0.1) and peaks[1].amplitude == pytest.approx(0.2, abs=0.01)

    def test_200_5_is_order_1(self):
        a = np.full(1001, 1e-4)
        a[401] = 1.0
        (m,) = detect_modulation(Spectrum(0.5, a), F_ROT, [], tol=1.0)
        assert m.frequency == 200.5 and m.attribution == ROTATION_HARMONIC and m.order == 1

    def test_milling_am_9hz(self):
        rec = milling_recording(modulation=(9.0, 0.5))
        spec = analyze_envelope(rec["ax"], rec.sample_rate, (1200, 3600)).envelope_spectrum
        low = [p for p in detect_peaks(spec) if p.frequency < 50]
        assert low and low[0].frequency == pytest.approx(9.0, abs=0.5)


class TestSynthExamples:
    def test_undamped_mode(self):
        x = modal_impulse(ModalModel.of((100, 0.0, 1.0)), 1000.0, 1.0)
        np.testing.assert_allclose(x, np.sin(2 * np.pi * 100 * t_axis(1000.0, 1.0)), atol=1e-12)

    def test_damped_17hz(self):
        x = modal_impulse(ModalModel.of((17, 0.02, 1.0)), 6250.0, 10.0)
        spec = amplitude_spectrum(x, 6250.0, "hann")
        (p, *_) = detect_peaks(spec)
        assert p.frequency == pytest.approx(17 * np.sqrt(1 - 0.02**2), abs=0.05)

    def test_tacho_10hz(self):
        pulses = detect_pulses(tacho_pulses(10.0, 1000.0, 1.0), 1000.0)
        assert pulses.size == 10
        assert rotation_frequency(pulses).mean_frequency == pytest.approx(10.0)

    def test_empty_scenario(self):
        rec = generate(SynthScenario(100.0, 1.0))
        assert rec.n_samples == 100 and all(np.all(rec[a] == 0) for a in ("ax", "ay", "az"))


class TestCommandExamples:
    def test_zero_signal_impact(self):
        rec = Recording("Z", 6250.0, {a: np.zeros(4000) for a in ("ax", "ay", "az")})
        report = run_impact(rec).report
        assert all(ax["peaks"] == [] for ax in report["axes"].values())

    def test_compare_shifts_and_flat(self):
        reports = [run_impact(impact_recording([f], lab)).report for lab, f in (("P1", 17), ("P2", 20), ("P3", 22))]
        st = run_compare(reports)["axes"]["ax"]["stiffness"][0]
        assert st["shifts_pct"] == pytest.approx({"P1": 0.0, "P2": 17.6, "P3": 29.4}, abs=0.5)
        same = run_compare([reports[0], reports[0]], names=["A", "B"])
        assert same["configs"] == ["A", "B"]
        assert same["axes"]["ax"]["stiffness"][0]["verdict"] == "flat"

    def test_y_ratios(self):
        reports = [run_impact(impact_recording([f], lab)).report for lab, f in (("P1", 12), ("P2", 10), ("P3", 8))]
        st = run_compare(reports)["axes"]["ax"]["stiffness"][0]
        assert [st["ratios"][c] for c in ("P1", "P2", "P3")] == pytest.approx([1.0, 0.694, 0.444], rel=0.02)
        assert st["verdict"] == "decrease"

    def test_spindle_rpm_and_setup_warning(self):
        rec = rotor_recording({1: 1.0})
        ok = run_spindle(rec, config_from_dict({"setup": {"tool_diameter_mm": 6, "cutting_speed_m_min": 227}}))
        assert ok["rotation"]["rpm"] == pytest.approx(12032, abs=1)
        assert ok["axes"]["ax"]["defects"]["imbalance"]
        assert ok["warnings"] == []
        bad = run_spindle(rec, config_from_dict({"setup": {"rpm": 12032, "tool_diameter_mm": 6,
                                                           "cutting_speed_m_min": 300}}))
        assert not bad["setup_check"]["ok"]
        assert any("cutting speed" in w for w in bad["warnings"])

    def test_milling_am_structural(self):
        cfg = config_from_dict({"setup": {"teeth": 6}, "bands": {"envelope": [1200, 3600]}, "modal_frequencies": [9]})
        ax = run_milling(milling_recording(modulation=(9.0, 0.5)), cfg).report["axes"]["ax"]
        near9 = [m for m in ax["modulation"] if abs(m["frequency_hz"] - 9) <= 0.5]
        assert near9 and near9[0]["attribution"] == STRUCTURAL

    def test_milling_null_case(self):
        cfg = config_from_dict({"setup": {"teeth": 6}, "bands": {"envelope": [1200, 3600]}})
        ax = run_milling(milling_recording(), cfg).report["axes"]["ax"]
        assert not ax["tooth_asymmetry"]["flagged"]
        assert all(m["order"] is not None and m["order"] % 6 == 0 for m in ax["modulation"])

    def test_default_band_warns(self):
        report = run_milling(milling_recording(), config_from_dict({"setup": {"teeth": 6}})).report
        assert any("narrower than the tooth-pass" in w for w in report["warnings"])
