"""JSON report schema and serialization."""

from __future__ import annotations

import datetime as _dt
import json
import os
from typing import Any

import jsonschema

from robovib.errors import InvalidInputError

SCHEMA_VERSION = 1

_num = {"type": "number"}
_nonneg = {"type": "number", "minimum": 0}
_str_list = {"type": "array", "items": {"type": "string"}}

_peak = {
    "type": "object",
    "required": ["frequency_hz", "amplitude", "band", "origin"],
    "properties": {
        "frequency_hz": _nonneg,
        "amplitude": _nonneg,
        "band": {"enum": ["LFR", "HFR", "OutOfBand"]},
        "origin": {"enum": ["structural", "external"]},
    },
}

_rotation = {
    "type": "object",
    "required": ["n_pulses", "mean_frequency_hz", "rpm", "speed_variation"],
    "properties": {
        "n_pulses": {"type": "integer", "minimum": 2},
        "mean_frequency_hz": {"type": "number", "exclusiveMinimum": 0},
        "rpm": {"type": "number", "exclusiveMinimum": 0},
        "speed_variation": _nonneg,
    },
}

_axes = lambda item: {"type": "object", "minProperties": 1, "additionalProperties": item}  # noqa: E731

_impact_axis = {
    "type": "object",
    "required": ["peaks"],
    "properties": {"peaks": {"type": "array", "items": _peak}},
}

_track = {
    "type": "object",
    "required": ["entries", "trend", "complete"],
    "properties": {
        "entries": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "object",
                "required": ["config", "frequency_hz", "amplitude"],
                "properties": {"config": {"type": "string"}, "frequency_hz": _nonneg, "amplitude": _nonneg},
            },
        },
        "trend": {"enum": ["increasing", "decreasing", "flat"]},
        "complete": {"type": "boolean"},
    },
}

_stiffness = {
    "type": "object",
    "required": ["track", "reference", "ratios", "shifts_pct", "verdict"],
    "properties": {
        "track": {"type": "integer", "minimum": 0},
        "reference": {"type": "string"},
        "ratios": {"type": "object", "additionalProperties": _nonneg},
        "shifts_pct": {"type": "object", "additionalProperties": _num},
        "verdict": {"enum": ["increase", "decrease", "flat"]},
    },
}

_compare_axis = {
    "type": "object",
    "required": ["peaks", "tracks", "stiffness"],
    "properties": {
        "peaks": {"type": "object", "additionalProperties": {"type": "array", "items": _peak}},
        "tracks": {"type": "array", "items": _track},
        "stiffness": {"type": "array", "items": _stiffness},
    },
}

_defects = {
    "type": "object",
    "required": ["imbalance", "severity", "misalignment", "ratio", "baseline", "resonance_matches"],
    "properties": {
        "imbalance": {"type": "boolean"},
        "severity": _nonneg,
        "misalignment": {"type": "boolean"},
        "ratio": _nonneg,
        "baseline": _nonneg,
        "resonance_matches": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["peak_frequency_hz", "modal_frequency_hz", "separation_hz"],
                "properties": {
                    "peak_frequency_hz": _nonneg,
                    "modal_frequency_hz": _nonneg,
                    "separation_hz": _nonneg,
                },
            },
        },
    },
}

_spindle_axis = {
    "type": "object",
    "required": ["orders", "absent_orders", "defects"],
    "properties": {
        "orders": {"type": "object", "additionalProperties": _nonneg},
        "absent_orders": {"type": "array", "items": {"type": "integer"}},
        "defects": _defects,
    },
}

_asymmetry = {
    "type": "object",
    "required": ["order_amplitudes", "tooth_pass_amplitude", "asymmetry_index", "flagged", "threshold"],
    "properties": {
        "order_amplitudes": {"type": "object", "additionalProperties": _nonneg},
        "tooth_pass_amplitude": _nonneg,
        "asymmetry_index": _nonneg,
        "flagged": {"type": "boolean"},
        "threshold": _nonneg,
    },
}

_milling_axis = {
    "type": "object",
    "required": ["modulation", "tooth_asymmetry", "envelope_mean", "envelope_bin_width_hz"],
    "properties": {
        "modulation": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["frequency_hz", "amplitude", "attribution", "order"],
                "properties": {
                    "frequency_hz": _nonneg,
                    "amplitude": _nonneg,
                    "attribution": {"enum": ["rotation-harmonic", "structural", "unattributed"]},
                    "order": {"type": ["integer", "null"]},
                },
            },
        },
        "tooth_asymmetry": _asymmetry,
        "envelope_mean": _nonneg,
        "envelope_bin_width_hz": {"type": "number", "exclusiveMinimum": 0},
    },
}


def _command(name: str, required: list[str], props: dict) -> dict:
    return {
        "if": {"properties": {"command": {"const": name}}},
        "then": {"required": required, "properties": props},
    }


REPORT_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "tool", "tool_version", "command", "warnings"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tool": {"const": "robovib"},
        "tool_version": {"type": "string"},
        "command": {"enum": ["impact", "compare", "spindle", "milling"]},
        "warnings": _str_list,
        "generated_at": {"type": "string"},
        "input": {
            "type": "object",
            "required": ["sha256", "label", "sample_rate_hz", "n_samples"],
            "properties": {
                "sha256": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
                "label": {"type": "string"},
                "sample_rate_hz": {"type": "number", "exclusiveMinimum": 0},
                "n_samples": {"type": "integer", "minimum": 2},
            },
        },
    },
    "allOf": [
        _command(
            "impact",
            ["input", "waterfall", "mains", "axes"],
            {
                "waterfall": {
                    "type": "object",
                    "required": ["block_size", "overlap", "window", "n_blocks", "bin_width_hz"],
                },
                "mains": {"type": "object", "required": ["frequency", "harmonics", "tol", "provisional"]},
                "axes": _axes(_impact_axis),
            },
        ),
        _command(
            "compare",
            ["configs", "inputs", "axes"],
            {
                "configs": {"type": "array", "minItems": 2, "items": {"type": "string"}},
                "inputs": {"type": "array", "minItems": 2},
                "axes": _axes(_compare_axis),
            },
        ),
        _command(
            "spindle",
            ["input", "rotation", "setup_check", "modal_frequencies", "axes"],
            {"rotation": _rotation, "axes": _axes(_spindle_axis)},
        ),
        _command(
            "milling",
            ["input", "rotation", "band", "teeth", "tooth_pass_frequency_hz", "axes"],
            {
                "rotation": _rotation,
                "band": {"type": "array", "minItems": 2, "maxItems": 2, "items": _nonneg},
                "teeth": {"type": "integer", "minimum": 2},
                "axes": _axes(_milling_axis),
            },
        ),
    ],
}


def validate_report(report: dict) -> None:
    """Raise InvalidInputError unless ``report`` matches REPORT_SCHEMA."""
    try:
        jsonschema.validate(report, REPORT_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise InvalidInputError(f"report does not match schema at '{path}': {exc.message}") from None


def dumps(report: dict) -> str:
    """Deterministic JSON text; non-finite numbers are rejected."""
    try:
        return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
    except ValueError as exc:
        raise InvalidInputError(f"report contains a non-finite number: {exc}") from None


def write_report(report: dict, path: str | os.PathLike, reproducible: bool = False) -> None:
    report = dict(report)
    if not reproducible:
        report["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    validate_report(report)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report))


def load_report(path: str | os.PathLike) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            report = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON: {exc}") from None
    validate_report(report)
    return report
