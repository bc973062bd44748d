"""Plain ``key = value`` run configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .engine import PRESETS, EngineParams, validate_params
from .errors import ConfigError, MalformedNumber, MissingRequired, UnknownKey

__all__ = ["RunConfig", "PARAM_KEYS", "parse_config", "load_config"]

# config key -> EngineParams field
PARAM_KEYS = {
    "epsilon_1": "eps1",
    "epsilon_2": "eps2",
    "epsilon_a": "eps_a",
    "epsilon_b": "eps_b",
    "T_c": "T_c",
    "T_h": "T_h",
    "T_l": "T_l",
    "g": "g",
    "r": "r",
    "p_c": "p_c",
    "p_h": "p_h",
}
OTHER_KEYS = ("preset", "seed", "count", "ranges", "out", "paper_literal", "eta")
RANGE_NAMES = ("fig5", "fig6", "fig7", "fig8")
TRUE = ("1", "true", "yes", "on")
FALSE = ("0", "false", "no", "off")


@dataclass(frozen=True)
class RunConfig:
    params: EngineParams
    preset: str | None = None
    seed: int = 42
    count: int = 1000
    ranges: str = "fig7"
    out: str | None = None
    paper_literal: bool = False
    # number, "carnot", or None for the most likely efficiency
    eta: Union[float, str, None] = None


def _number(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(text)
    return v


def parse_config(text: str) -> RunConfig:
    """Parse and validate; every bad line is reported in one exception.

    The exception class is that of the first problem found; ``.problems``
    lists all of them.
    """
    problems: list[tuple[type, str]] = []
    values: dict[str, float] = {}
    extra: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append((ConfigError, f"line {lineno}: expected 'key = value', got {raw.strip()!r}"))
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        where = f"line {lineno}: {key}"
        if key in PARAM_KEYS:
            try:
                values[PARAM_KEYS[key]] = _number(value)
            except ValueError:
                problems.append((MalformedNumber, f"{where}: {value!r} is not a finite decimal number"))
        elif key == "preset":
            if value not in PRESETS:
                problems.append((ConfigError, f"{where}: unknown preset {value!r} (have {', '.join(PRESETS)})"))
            else:
                extra["preset"] = value
        elif key in ("seed", "count"):
            try:
                n = int(value, 0)
                if n < 0 or (key == "count" and n < 1):
                    raise ValueError(value)
                extra[key] = n
            except ValueError:
                problems.append((MalformedNumber, f"{where}: {value!r} is not a valid integer"))
        elif key == "ranges":
            if value not in RANGE_NAMES:
                problems.append((ConfigError, f"{where}: unknown ranges {value!r} (have {', '.join(RANGE_NAMES)})"))
            else:
                extra["ranges"] = value
        elif key == "out":
            extra["out"] = value
        elif key == "paper_literal":
            if value.lower() in TRUE + FALSE:
                extra["paper_literal"] = value.lower() in TRUE
            else:
                problems.append((ConfigError, f"{where}: {value!r} is not a boolean"))
        elif key == "eta":
            if value in ("carnot", "eta_star"):
                extra["eta"] = None if value == "eta_star" else value
            else:
                try:
                    extra["eta"] = _number(value)
                except ValueError:
                    problems.append((MalformedNumber, f"{where}: {value!r} is not a number, 'carnot' or 'eta_star'"))
        else:
            problems.append((UnknownKey, f"{where}: unknown key"))

    base = PRESETS.get(extra.get("preset"))
    if base is None and not problems:
        missing = [k for k, f in PARAM_KEYS.items() if f not in values]
        if missing:
            problems.append((MissingRequired, "missing required keys (or a preset): " + ", ".join(missing)))
    if problems:
        raise problems[0][0]([msg for _, msg in problems])

    params = base.replace(**values) if base is not None else EngineParams(**values)
    validate_params(params).raise_if_failed()
    return RunConfig(params=params, **extra)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
