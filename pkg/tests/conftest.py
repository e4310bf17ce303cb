import numpy as np
import pytest

from robovib import synth

F_ROT = 12032 / 60  # 200.533... Hz
# 20 samples per tooth period at 6 teeth: milling records are exactly periodic
FS_MILL = 20 * 6 * F_ROT


def direct_dft(x):
    """O(N^2) DFT by explicit summation."""
    x = np.asarray(x, dtype=np.float64)
    n = np.arange(x.size)
    return np.exp(-2j * np.pi * np.outer(n, n) / x.size) @ x


def impact_recording(modes, label, damping=0.02, mains=None, fs=6250.0, duration=4.0, noise=1e-3, seed=1):
    comps = [synth.ModalModel.of(*[(f, damping, 1.0) for f in modes])]
    if mains:
        comps.append(synth.RotorModel(50.0, mains))
    sc = synth.SynthScenario(fs, duration, {"ax": comps}, noise_sd=noise, seed=seed, label=label)
    return synth.generate(sc)


def rotor_recording(orders, extra=(), fs=25000.0, duration=2.0, noise=1e-3, seed=3):
    comps = [synth.RotorModel(F_ROT, orders)]
    comps += [synth.RotorModel(f, {1: a}) for f, a in extra]
    sc = synth.SynthScenario(fs, duration, {"ax": comps}, noise_sd=noise, seed=seed, label="P1", tacho=(F_ROT, 0.5))
    return synth.generate(sc)


def milling_recording(gains=None, modulation=(0.0, 0.0), revolutions=400, noise=0.0, seed=5):
    model = synth.MillingModel(F_ROT, 6, gains, resonance=(2500.0, 0.05), modulation=modulation)
    sc = synth.SynthScenario(
        FS_MILL, revolutions / F_ROT, {"ax": [model]}, noise_sd=noise, seed=seed, label="P1", tacho=(F_ROT, 0.5)
    )
    return synth.generate(sc)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
