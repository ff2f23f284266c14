"""Scenario files: system, perturbation and run options in INI form.

A scenario has the sections ``[system]``, ``[perturbation]`` and ``[run]``.
``[system]`` holds either the nine normal-form parameters or all fifteen
raw zone coefficients (detected by the presence of any ``alpha_*`` key).
Missing perturbation coefficients default to zero.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Union

from .errors import ParseError
from .model import PERTURBATION_NAMES, Perturbation, RawSystem, SystemParameters

NORMAL_KEYS = tuple(f.name for f in fields(SystemParameters))
RAW_KEYS = tuple(f.name for f in fields(RawSystem))
SECTIONS = ("system", "perturbation", "run")


def fmt(x: float) -> str:
    """Seventeen significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Scenario:
    """A system, a perturbation and command-specific run options."""

    system: Union[SystemParameters, RawSystem]
    perturbation: Perturbation = field(default_factory=Perturbation)
    run: dict = field(default_factory=dict)

    @property
    def is_raw(self) -> bool:
        return isinstance(self.system, RawSystem)

    def to_text(self) -> str:
        keys = RAW_KEYS if self.is_raw else NORMAL_KEYS
        lines = ["[system]"]
        lines += [f"{k} = {fmt(getattr(self.system, k))}" for k in keys]
        lines += ["", "[perturbation]"]
        lines += [f"{k} = {fmt(getattr(self.perturbation, k))}" for k in PERTURBATION_NAMES]
        lines += ["", "[run]"]
        lines += [f"{k} = {v}" for k, v in sorted(self.run.items())]
        return "\n".join(lines) + "\n"

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_text())

    def run_float(self, key: str, default: float) -> float:
        return float(self.run.get(key, default))

    def run_floats(self, key: str, default) -> tuple[float, ...]:
        v = self.run.get(key)
        if v is None:
            return tuple(default)
        return tuple(float(x) for x in str(v).replace(",", " ").split())

    def run_int(self, key: str, default: int) -> int:
        return int(self.run.get(key, default))


def _line_of(text: str, section: str, key: str) -> int:
    current = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
        elif current == section and "=" in line and line.split("=", 1)[0].strip() == key:
            return i
    return 0


def _float(text, section, key, value) -> float:
    try:
        x = float(value)
    except ValueError:
        raise ParseError(
            f"line {_line_of(text, section, key)}: [{section}] {key} = {value!r} is not a number"
        ) from None
    if not math.isfinite(x):
        raise ParseError(f"line {_line_of(text, section, key)}: [{section}] {key} is not finite")
    return x


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text.

    Raises
    ------
    ParseError
        With the offending line and field for malformed input, unknown keys
        or missing system parameters.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"malformed scenario: {exc}") from None
    for sec in cp.sections():
        if sec not in SECTIONS:
            raise ParseError(f"line {_line_of_section(text, sec)}: unknown section [{sec}]")
    if not cp.has_section("system"):
        raise ParseError("missing [system] section")
    sysd = dict(cp.items("system"))
    raw = any(k.startswith("alpha_") for k in sysd)
    keys = RAW_KEYS if raw else NORMAL_KEYS
    for k in sysd:
        if k not in keys:
            raise ParseError(f"line {_line_of(text, 'system', k)}: unknown system field {k!r}")
    missing = [k for k in keys if k not in sysd]
    if missing:
        raise ParseError(f"[system] missing fields: {', '.join(missing)}")
    vals = {k: _float(text, "system", k, sysd[k]) for k in keys}
    system = RawSystem(**vals) if raw else SystemParameters(**vals)
    pvals = {}
    if cp.has_section("perturbation"):
        for k, v in cp.items("perturbation"):
            if k not in PERTURBATION_NAMES:
                raise ParseError(f"line {_line_of(text, 'perturbation', k)}: unknown perturbation field {k!r}")
            pvals[k] = _float(text, "perturbation", k, v)
    run = dict(cp.items("run")) if cp.has_section("run") else {}
    return Scenario(system, Perturbation(**pvals), run)


def _line_of_section(text: str, sec: str) -> int:
    for i, raw in enumerate(text.splitlines(), 1):
        if raw.strip() == f"[{sec}]":
            return i
    return 0


def read_scenario(path: Union[str, Path]) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read scenario {str(path)!r}: {exc.strerror}") from None
    return parse_scenario(text)
