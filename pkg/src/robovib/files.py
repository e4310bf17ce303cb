"""CSV recording format.

::

    # sample_rate_hz=25000
    # label=P1
    t,ax,ay,az,tacho
    0.0,0.12,-0.03,0.5,0.0
    ...

The label line, the ``t`` column and the ``tacho`` column are optional.
Values are written with ``repr`` so a write/read cycle is bit-exact.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from robovib.errors import InvalidInputError, ParseError, TimingError
from robovib.signal_core import Recording

RATE_PREFIX = "# sample_rate_hz="
LABEL_PREFIX = "# label="
AXIS_COLUMNS = ("ax", "ay", "az")
TIME_TOL = 1e-3


def _allowed_headers() -> list[tuple[str, ...]]:
    out = []
    for lead in ((), ("t",)):
        for tail in ((), ("tacho",)):
            out.append(lead + AXIS_COLUMNS + tail)
    return out


def parse_recording(path: str | os.PathLike) -> Recording:
    """Read and validate a recording file."""
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc}") from None
    if "\r" in text:
        raise ParseError("recording files must use LF line endings")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    if not lines or not lines[0].startswith(RATE_PREFIX):
        raise ParseError(f"first line must be '{RATE_PREFIX}<rate>'", line=1)
    try:
        sample_rate = float(lines[0][len(RATE_PREFIX):])
    except ValueError:
        raise ParseError("sample rate is not a number", line=1) from None
    if not (np.isfinite(sample_rate) and sample_rate > 0):
        raise ParseError("sample rate must be positive", line=1)

    pos = 1
    label = ""
    if pos < len(lines) and lines[pos].startswith(LABEL_PREFIX):
        label = lines[pos][len(LABEL_PREFIX):]
        pos += 1
    if pos >= len(lines):
        raise ParseError("missing header row", line=pos + 1)
    header = tuple(lines[pos].split(","))
    if header not in _allowed_headers():
        raise ParseError(f"unexpected header {','.join(header)!r}; expected t?,ax,ay,az,tacho?", line=pos + 1)
    pos += 1

    ncol = len(header)
    rows = []
    for lineno, line in enumerate(lines[pos:], start=pos + 1):
        cells = line.split(",")
        if len(cells) != ncol:
            raise ParseError(f"expected {ncol} columns, got {len(cells)}", line=lineno)
        try:
            row = [float(c) for c in cells]
        except ValueError:
            raise ParseError(f"non-numeric value in {line!r}", line=lineno) from None
        if not all(np.isfinite(row)):
            raise ParseError("non-finite value", line=lineno)
        rows.append(row)
    if len(rows) < 2:
        raise ParseError(f"need at least 2 data rows, got {len(rows)}")

    data = np.array(rows, dtype=np.float64)
    cols = {name: data[:, i] for i, name in enumerate(header)}
    if "t" in cols:
        dt = np.diff(cols.pop("t"))
        expected = 1.0 / sample_rate
        bad = np.flatnonzero(np.abs(dt - expected) > TIME_TOL * expected)
        if bad.size:
            raise TimingError(
                f"t advances by {float(dt[bad[0]])!r} s, expected {expected!r} s",
                line=pos + int(bad[0]) + 2,
            )
    try:
        return Recording(label, sample_rate, cols)
    except InvalidInputError as exc:
        raise ParseError(str(exc)) from None


def format_recording(recording: Recording, include_time: bool = True) -> str:
    names = [c for c in AXIS_COLUMNS if c in recording.channels]
    if len(names) != len(AXIS_COLUMNS):
        raise InvalidInputError(f"recording needs channels {AXIS_COLUMNS}")
    if "tacho" in recording.channels:
        names.append("tacho")
    extra = set(recording.channels) - set(names)
    if extra:
        raise InvalidInputError(f"channels {sorted(extra)} have no column in the file format")
    if "\n" in recording.label:
        raise InvalidInputError("label must be a single line")

    columns = [recording.channels[c] for c in names]
    if include_time:
        columns.insert(0, np.arange(recording.n_samples) / recording.sample_rate)
        names.insert(0, "t")
    out = [f"{RATE_PREFIX}{recording.sample_rate!r}"]
    if recording.label:
        out.append(f"{LABEL_PREFIX}{recording.label}")
    out.append(",".join(names))
    table = np.column_stack(columns).tolist()
    out.extend(",".join(map(repr, row)) for row in table)
    return "\n".join(out) + "\n"


def write_recording(recording: Recording, path: str | os.PathLike, include_time: bool = True) -> None:
    text = format_recording(recording, include_time)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_table(path: str | os.PathLike, header: list[str], columns: list[np.ndarray]) -> None:
    """Plot-ready CSV of equal-length numeric columns."""
    table = np.column_stack(columns).tolist()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in table:
            fh.write(",".join(map(repr, row)) + "\n")
