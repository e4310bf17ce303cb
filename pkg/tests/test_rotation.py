import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import F_ROT, rotor_recording
from robovib.errors import ConfigError, InsufficientDataError, InvalidInputError, NoPulsesError
from robovib.rotation import (
    DiagnosisThresholds,
    MachiningSetup,
    OrderSpectrum,
    SpeedVariationWarning,
    detect_pulses,
    diagnose,
    order_spectrum,
    rotation_frequency,
    tooth_pass_frequency,
    warn_on_speed_variation,
)
from robovib.signal_core import Spectrum, amplitude_spectrum
from robovib.synth import tacho_pulses


def square(n_rev, per_rev=100, duty=0.5):
    one = np.r_[np.zeros(int(per_rev * (1 - duty))), np.ones(int(per_rev * duty))]
    return np.tile(one, n_rev)


class TestPulses:
    def test_square_wave_count(self):
        pulses = detect_pulses(square(100), 1000.0)
        assert pulses.size == 100
        # edges halfway between the last low and first high sample
        np.testing.assert_allclose(pulses, (np.arange(100) * 100 + 49.5) / 1000)

    def test_rotation_frequency(self):
        prof = rotation_frequency(detect_pulses(square(100), 1000.0))
        assert prof.mean_frequency == pytest.approx(10.0)
        assert prof.rpm == pytest.approx(600.0)
        assert prof.speed_variation == pytest.approx(0.0, abs=1e-9)

    def test_noisy_pulses(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            x = square(100) + rng.normal(0, 0.02, 10000)
            assert detect_pulses(x, 1000.0).size == 100

    def test_synthetic_tacho_exact(self):
        fs = 25000.0
        pulses = detect_pulses(tacho_pulses(F_ROT, fs, 0.5), fs)
        # rising edge of revolution k at (k + 0.5) / f_rot
        k = np.arange(pulses.size)
        np.testing.assert_allclose(pulses, (k + 0.5) / F_ROT, atol=1e-9)
        assert rotation_frequency(pulses).mean_frequency == pytest.approx(F_ROT, rel=1e-9)

    @given(st.integers(0, 99))
    def test_time_shift_invariant(self, shift):
        x = square(20)
        base = detect_pulses(x, 1000.0)
        shifted = detect_pulses(np.r_[np.zeros(shift), x], 1000.0)
        np.testing.assert_allclose(shifted, base + shift / 1000, atol=1e-12)

    @given(st.floats(0.01, 1e4), st.floats(-1e3, 1e3))
    def test_affine_invariant(self, scale, offset):
        x = square(10)
        np.testing.assert_allclose(detect_pulses(scale * x + offset, 100.0), detect_pulses(x, 100.0), atol=1e-9)

    def test_constant(self):
        with pytest.raises(NoPulsesError):
            detect_pulses(np.ones(100), 100.0)

    def test_single_step_no_edge_after_arming(self):
        with pytest.raises(NoPulsesError):
            detect_pulses(np.r_[np.ones(50), np.zeros(50)], 100.0)

    def test_bad_thresholds(self):
        with pytest.raises(ConfigError):
            detect_pulses(square(3), 100.0, threshold=0.5, hysteresis=0.6)

    def test_too_few_pulses(self):
        with pytest.raises(InsufficientDataError):
            rotation_frequency([0.1])

    def test_non_increasing(self):
        with pytest.raises(InvalidInputError):
            rotation_frequency([0.1, 0.1, 0.2])

    def test_speed_variation_warning(self):
        prof = rotation_frequency([0.0, 0.1, 0.2, 0.31])
        with pytest.warns(SpeedVariationWarning):
            assert warn_on_speed_variation(prof) is not None
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert warn_on_speed_variation(rotation_frequency([0, 1, 2])) is None


class TestSetup:
    def test_tooth_pass(self):
        setup = MachiningSetup(12032, teeth=6)
        assert tooth_pass_frequency(setup) == pytest.approx(1203.2)
        assert setup.rotation_frequency == pytest.approx(200.5333333)

    def test_cutting_speed(self):
        check = MachiningSetup(12032, 6, tool_diameter=6, cutting_speed=227).check_cutting_speed()
        assert check.computed_m_min == pytest.approx(math.pi * 0.006 * 12032)
        assert round(check.computed_m_min, 1) == 226.8
        assert check.ok

    def test_cutting_speed_mismatch(self):
        assert not MachiningSetup(12032, 6, tool_diameter=6, cutting_speed=250).check_cutting_speed().ok

    def test_missing_fields(self):
        assert MachiningSetup(12032, 6).check_cutting_speed() is None

    @pytest.mark.parametrize("kw", [dict(spindle_speed=0), dict(spindle_speed=100, teeth=0),
                                    dict(spindle_speed=100, teeth=1.5), dict(spindle_speed=100, tool_diameter=-1)])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            MachiningSetup(**kw)


def spectrum_of(orders, extra=(), seed=3, noise=1e-3):
    rec = rotor_recording(orders, extra, noise=noise, seed=seed)
    return amplitude_spectrum(rec["ax"], rec.sample_rate, "hann")


class TestOrders:
    def test_order_amplitudes(self):
        spec = spectrum_of({1: 1.0, 2: 0.7})
        os_ = order_spectrum(spec, F_ROT)
        # f_rot is off-bin by 0.033 Hz of a 0.5 Hz bin: Hann scalloping under 2 %
        assert os_.amplitude(1) == pytest.approx(1.0, rel=0.02)
        assert os_.amplitude(2) == pytest.approx(0.7, rel=0.02)
        assert os_.amplitude(3) < 0.01
        assert os_.absent == ()

    def test_absent_orders(self):
        spec = Spectrum(1.0, np.zeros(501))
        os_ = order_spectrum(spec, 120.0, max_order=10)
        assert os_.absent == (5, 6, 7, 8, 9, 10)
        assert os_.amplitude(7) == 0.0

    def test_tol_too_small(self):
        with pytest.raises(ConfigError):
            order_spectrum(Spectrum(1.0, np.ones(10)), 2.0, tol=0.1)

    @settings(max_examples=30)
    @given(st.floats(0.5, 10), st.floats(0, 10))
    def test_monotone_in_tol(self, tol, extra):
        rng = np.random.default_rng(0)
        spec = Spectrum(0.5, rng.random(2000))
        a = order_spectrum(spec, 37.3, 5, tol)
        b = order_spectrum(spec, 37.3, 5, tol + extra)
        assert all(b.orders[k] >= a.orders[k] for k in a.orders)


class TestDiagnose:
    def test_imbalance_only(self):
        spec = spectrum_of({1: 1.0})
        flags = diagnose(order_spectrum(spec, F_ROT), spec)
        assert flags.imbalance and not flags.misalignment
        assert flags.severity > 5
        assert flags.resonance_matches == ()

    def test_misalignment(self):
        spec = spectrum_of({1: 1.0, 2: 0.7})
        flags = diagnose(order_spectrum(spec, F_ROT), spec)
        assert flags.imbalance and flags.misalignment
        assert flags.ratio == pytest.approx(0.7, rel=0.03)

    def test_ratio_below_threshold(self):
        spec = spectrum_of({1: 1.0, 2: 0.3})
        flags = diagnose(order_spectrum(spec, F_ROT), spec)
        assert flags.imbalance and not flags.misalignment

    def test_noise_flags_nothing(self):
        for seed in range(20):
            spec = spectrum_of({}, seed=seed, noise=0.1)
            flags = diagnose(order_spectrum(spec, F_ROT), spec)
            assert not flags.imbalance and not flags.misalignment

    def test_resonance_match(self):
        spec = spectrum_of({1: 1.0}, extra=[(480.0, 0.5)])
        flags = diagnose(order_spectrum(spec, F_ROT), spec, [480.0])
        assert [round(m.peak_frequency) for m in flags.resonance_matches] == [480]
        assert flags.resonance_matches[0].separation < 0.5

    def test_resonance_tolerance(self):
        th = DiagnosisThresholds()
        assert th.resonance_tol(480) == pytest.approx(9.6)
        assert th.resonance_tol(100) == 5.0
        spec = spectrum_of({1: 1.0}, extra=[(470.0, 0.5)])
        assert diagnose(order_spectrum(spec, F_ROT), spec, [480.0]).resonance_matches == ()  # 10 Hz > 9.6

    def test_zero_spectrum_finite(self):
        spec = Spectrum(1.0, np.zeros(1000))
        flags = diagnose(order_spectrum(spec, 50.0), spec)
        assert not flags.imbalance and flags.severity == 0.0 and flags.ratio == 0.0

    def test_noise_free_severity_finite(self):
        a = np.zeros(1000)
        a[50] = 1.0
        spec = Spectrum(1.0, a)
        flags = diagnose(order_spectrum(spec, 50.0), spec)
        assert flags.imbalance and np.isfinite(flags.severity)

    def test_needs_orders_1_and_2(self):
        with pytest.raises(InvalidInputError):
            diagnose(OrderSpectrum(100.0, {1: 1.0}, 1), Spectrum(1.0, np.ones(10)))

    @settings(max_examples=25)
    @given(st.floats(1e-3, 1e3))
    def test_scale_invariant(self, c):
        spec = spectrum_of({1: 1.0, 2: 0.6})
        scaled = Spectrum(spec.bin_width, c * spec.amplitudes)
        a = diagnose(order_spectrum(spec, F_ROT), spec)
        b = diagnose(order_spectrum(scaled, F_ROT), scaled)
        assert (a.imbalance, a.misalignment) == (b.imbalance, b.misalignment)
        assert b.ratio == pytest.approx(a.ratio, rel=1e-9)
        assert b.severity == pytest.approx(a.severity, rel=1e-9)


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=20), st.floats(-1e3, 1e3))
def test_rotation_frequency_shift_invariant(steps, shift):
    t = np.cumsum([0.0, *steps])
    a, b = rotation_frequency(t), rotation_frequency(t + shift)
    assert b.mean_frequency == pytest.approx(a.mean_frequency, rel=1e-6)
