"""Analysis configuration (JSON).

Every field is optional.  Defaults::

    {
      "bands": {"lfr": [0, 250], "hfr": [1200, 3600], "envelope": [2000, 3000]},
      "mains": {"frequency": 50, "harmonics": 2, "tol": 0.5},
      "thresholds": {"peak_floor": 5, "prominence": 0.1, "imbalance_factor": 5,
                     "misalignment_ratio": 0.5, "asymmetry": 0.2,
                     "resonance_tol_pct": 2},
      "setup": {"rpm": null, "teeth": null, "tool_diameter_mm": null,
                "cutting_speed_m_min": null, "feed_mm_min": null},
      "modal_frequencies": [],
      "waterfall": {"block_size": 2000, "overlap": 0, "window": "hann"},
      "tacho": {"threshold": 0.5, "hysteresis": 0.1},
      "scenario": null
    }

``modal_frequencies`` lists known self-excited frequencies: the spindle
command matches spectral peaks against all of them, the milling command
attributes envelope peaks to those inside the LFR.  ``scenario`` drives the
``synth`` command (see :func:`scenario_from_dict`).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any

from robovib.errors import ConfigError
from robovib.modal import BandConfig
from robovib.rotation import DiagnosisThresholds, MachiningSetup
from robovib.signal_core import WINDOW_KINDS
from robovib.synth import AXES, MillingModel, ModalModel, Mode, RotorModel, SynthScenario


@dataclass(frozen=True)
class Bands:
    lfr: tuple[float, float] = (0.0, 250.0)
    hfr: tuple[float, float] = (1200.0, 3600.0)
    envelope: tuple[float, float] = (2000.0, 3000.0)

    @property
    def modal(self) -> BandConfig:
        return BandConfig(self.lfr, self.hfr)


@dataclass(frozen=True)
class Mains:
    frequency: float = 50.0
    harmonics: int = 2
    tol: float = 0.5


@dataclass(frozen=True)
class Thresholds:
    peak_floor: float = 5.0
    prominence: float = 0.1
    imbalance_factor: float = 5.0
    misalignment_ratio: float = 0.5
    asymmetry: float = 0.2
    resonance_tol_pct: float = 2.0

    def diagnosis(self) -> DiagnosisThresholds:
        return DiagnosisThresholds(
            imbalance_factor=self.imbalance_factor,
            misalignment_ratio=self.misalignment_ratio,
            resonance_tol_pct=self.resonance_tol_pct,
            peak_floor=self.peak_floor,
            prominence=self.prominence,
        )


@dataclass(frozen=True)
class Setup:
    rpm: float | None = None
    teeth: int | None = None
    tool_diameter_mm: float | None = None
    cutting_speed_m_min: float | None = None
    feed_mm_min: float | None = None

    def machining(self, rpm: float | None = None) -> MachiningSetup | None:
        """MachiningSetup at the configured rpm, or at ``rpm`` when none is configured."""
        n = self.rpm if self.rpm is not None else rpm
        if n is None:
            return None
        return MachiningSetup(
            spindle_speed=n,
            teeth=self.teeth if self.teeth is not None else 1,
            tool_diameter=self.tool_diameter_mm,
            cutting_speed=self.cutting_speed_m_min,
            feed_rate=self.feed_mm_min,
        )


@dataclass(frozen=True)
class WaterfallSettings:
    block_size: int = 2000
    overlap: float = 0.0
    window: str = "hann"


@dataclass(frozen=True)
class TachoSettings:
    threshold: float = 0.5
    hysteresis: float = 0.1


@dataclass(frozen=True)
class Config:
    bands: Bands = field(default_factory=Bands)
    mains: Mains = field(default_factory=Mains)
    thresholds: Thresholds = field(default_factory=Thresholds)
    setup: Setup = field(default_factory=Setup)
    modal_frequencies: tuple[float, ...] = ()
    waterfall: WaterfallSettings = field(default_factory=WaterfallSettings)
    tacho: TachoSettings = field(default_factory=TachoSettings)
    scenario: dict | None = None


def _number(value: Any, where: str, *, positive: bool = False, integer: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{where} must be positive, got {value!r}")
    if value != value or value in (float("inf"), float("-inf")):
        raise ConfigError(f"{where} must be finite")
    return int(value) if integer else float(value)


def _interval(value: Any, where: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{where} must be a [low, high] pair")
    lo, hi = (_number(v, where) for v in value)
    if not 0 <= lo < hi:
        raise ConfigError(f"{where} must satisfy 0 <= low < high, got {list(value)}")
    return lo, hi


def _section(data: dict, name: str, allowed: set[str]) -> dict:
    sec = data.get(name, {})
    if sec is None:
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"'{name}' must be an object")
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in '{name}': {sorted(unknown)}")
    return sec


TOP_LEVEL = {"bands", "mains", "thresholds", "setup", "modal_frequencies", "waterfall", "tacho", "scenario"}


def config_from_dict(data: dict) -> Config:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(data) - TOP_LEVEL
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {sorted(unknown)}")

    b = _section(data, "bands", {"lfr", "hfr", "envelope"})
    bands = Bands(
        lfr=_interval(b.get("lfr", Bands.lfr), "bands.lfr"),
        hfr=_interval(b.get("hfr", Bands.hfr), "bands.hfr"),
        envelope=_interval(b.get("envelope", Bands.envelope), "bands.envelope"),
    )
    if not bands.lfr[1] < bands.hfr[0]:
        raise ConfigError("bands.lfr must end below the start of bands.hfr")
    if bands.envelope[0] <= 0:
        raise ConfigError("bands.envelope must start above 0 Hz")

    m = _section(data, "mains", {"frequency", "harmonics", "tol"})
    mains = Mains(
        frequency=_number(m.get("frequency", Mains.frequency), "mains.frequency", positive=True),
        harmonics=_number(m.get("harmonics", Mains.harmonics), "mains.harmonics", positive=True, integer=True),
        tol=_number(m.get("tol", Mains.tol), "mains.tol", positive=True),
    )

    t = _section(data, "thresholds", set(Thresholds.__dataclass_fields__))
    thresholds = Thresholds(
        **{k: _number(t.get(k, getattr(Thresholds, k)), f"thresholds.{k}") for k in Thresholds.__dataclass_fields__}
    )
    if thresholds.peak_floor < 1:
        raise ConfigError("thresholds.peak_floor must be >= 1")
    if not 0 <= thresholds.prominence < 1:
        raise ConfigError("thresholds.prominence must be in [0, 1)")
    for k in ("imbalance_factor", "misalignment_ratio", "asymmetry", "resonance_tol_pct"):
        if getattr(thresholds, k) < 0:
            raise ConfigError(f"thresholds.{k} must be non-negative")

    s = _section(data, "setup", set(Setup.__dataclass_fields__))
    setup_kwargs = {}
    for k in Setup.__dataclass_fields__:
        v = s.get(k)
        if v is not None:
            setup_kwargs[k] = _number(v, f"setup.{k}", positive=True, integer=(k == "teeth"))
    setup = Setup(**setup_kwargs)

    modal = data.get("modal_frequencies", [])
    if not isinstance(modal, list):
        raise ConfigError("modal_frequencies must be a list")
    modal_frequencies = tuple(_number(f, "modal_frequencies[]", positive=True) for f in modal)

    w = _section(data, "waterfall", {"block_size", "overlap", "window"})
    wf = WaterfallSettings(
        block_size=_number(w.get("block_size", 2000), "waterfall.block_size", positive=True, integer=True),
        overlap=_number(w.get("overlap", 0.0), "waterfall.overlap"),
        window=w.get("window", "hann"),
    )
    if not 0 <= wf.overlap < 1:
        raise ConfigError("waterfall.overlap must be in [0, 1)")
    if wf.window not in WINDOW_KINDS:
        raise ConfigError(f"waterfall.window must be one of {WINDOW_KINDS}")

    tc = _section(data, "tacho", {"threshold", "hysteresis"})
    tacho = TachoSettings(
        threshold=_number(tc.get("threshold", 0.5), "tacho.threshold"),
        hysteresis=_number(tc.get("hysteresis", 0.1), "tacho.hysteresis"),
    )
    if not 0 < tacho.hysteresis < tacho.threshold < 1:
        raise ConfigError("tacho settings must satisfy 0 < hysteresis < threshold < 1")

    scenario = data.get("scenario")
    if scenario is not None:
        scenario_from_dict(scenario)  # validate early
    return Config(bands, mains, thresholds, setup, modal_frequencies, wf, tacho, scenario)


def load_config(path: str | os.PathLike | None) -> Config:
    if path is None:
        return Config()
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return config_from_dict(data)


def _component_from_dict(d: Any, where: str):
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigError(f"{where} must be an object with a 'type'")
    kind = d["type"]
    body = {k: v for k, v in d.items() if k != "type"}
    try:
        if kind == "modal":
            return ModalModel(tuple(Mode(*map(float, m)) for m in body["modes"]))
        if kind == "rotor":
            return RotorModel(
                rotation_frequency=_number(body["frequency"], f"{where}.frequency", positive=True),
                amplitudes={int(k): float(v) for k, v in body.get("orders", {}).items()},
                phases={int(k): float(v) for k, v in body.get("phases", {}).items()},
            )
        if kind == "milling":
            gains = body.get("gains")
            return MillingModel(
                rotation_frequency=_number(body["frequency"], f"{where}.frequency", positive=True),
                teeth=_number(body["teeth"], f"{where}.teeth", positive=True, integer=True),
                gains=None if gains is None else tuple(float(g) for g in gains),
                resonance=tuple(map(float, body.get("resonance", (2500.0, 0.05)))),
                modulation=tuple(map(float, body.get("modulation", (0.0, 0.0)))),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: malformed {kind} component ({exc})") from None
    raise ConfigError(f"{where}: unknown component type {kind!r}")


def scenario_from_dict(d: Any) -> SynthScenario:
    """Build a SynthScenario.

    Example::

        {"sample_rate": 6250, "duration": 2.0, "label": "P1", "seed": 1,
         "noise_sd": 0.001,
         "channels": {"ax": [{"type": "modal", "modes": [[17, 0.02, 1.0]]},
                             {"type": "rotor", "frequency": 50, "orders": {"1": 0.05}}]},
         "tacho": {"frequency": 200.533, "duty": 0.5}}
    """
    if not isinstance(d, dict):
        raise ConfigError("scenario must be an object")
    allowed = {"sample_rate", "duration", "label", "seed", "noise_sd", "channels", "tacho"}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown scenario key(s): {sorted(unknown)}")
    if "sample_rate" not in d or "duration" not in d:
        raise ConfigError("scenario needs sample_rate and duration")
    fs = _number(d["sample_rate"], "scenario.sample_rate", positive=True)
    dur = _number(d["duration"], "scenario.duration", positive=True)
    if dur * fs < 2:
        raise ConfigError("scenario must contain at least 2 samples")
    channels = d.get("channels", {}) or {}
    if not isinstance(channels, dict) or set(channels) - set(AXES):
        raise ConfigError(f"scenario.channels must map a subset of {AXES} to component lists")
    comps = {
        axis: tuple(_component_from_dict(c, f"scenario.channels.{axis}[{i}]") for i, c in enumerate(cs))
        for axis, cs in channels.items()
    }
    tacho = d.get("tacho")
    if tacho is not None:
        if not isinstance(tacho, dict) or "frequency" not in tacho:
            raise ConfigError("scenario.tacho needs a frequency")
        tacho = (
            _number(tacho["frequency"], "scenario.tacho.frequency", positive=True),
            _number(tacho.get("duty", 0.5), "scenario.tacho.duty", positive=True),
        )
    seed = _number(d.get("seed", 0), "scenario.seed", integer=True)
    if seed < 0:
        raise ConfigError(f"scenario.seed must be non-negative, got {seed}")
    label = d.get("label", "")
    if not isinstance(label, str):
        raise ConfigError("scenario.label must be a string")
    return SynthScenario(
        sample_rate=fs,
        duration=dur,
        channels=comps,
        noise_sd=_number(d.get("noise_sd", 0.0), "scenario.noise_sd"),
        seed=seed,
        label=label,
        tacho=tacho,
    )
