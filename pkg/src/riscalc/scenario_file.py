"""Reader for line-oriented scenario files.

Format::

    # comment
    [global]
    carrier_frequency_hz = 2.4e9
    outage_threshold_db = 0
    snr_grid_db = 60, 140, 2        # start, stop (inclusive), step

    [ris]                           # repeat once per RIS
    n_elements = 5
    d1_m = 5
    d2_m = 5

    [modulation]                    # preset = BPSK | QPSK, or p / q / label
    [mc]                            # trials, seed, chunk_size
    [optimize]                      # n_max, p_out_th, avg_snr_db, start_point,
                                    # total_distance_m, d_min_m, start_distances_m

Omitted values take the library defaults:
2.4 GHz carrier, 5 dB gains per hop, unit efficiency and a 0 dB outage
threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .channel import GlobalConfig, RisLinkConfig
from .errors import RisCalcError, ValidationError
from .metrics import BPSK, QPSK, ModulationScheme
from .montecarlo import McRun
from .snr_stats import Scenario, SeriesTruncation

__all__ = [
    "ScenarioParseError",
    "ScenarioValidationError",
    "ScenarioIOError",
    "OptimizeBlock",
    "ScenarioBundle",
    "parse_scenario",
    "parse_scenario_text",
]


class ScenarioParseError(RisCalcError):
    exit_code = 2


class ScenarioValidationError(RisCalcError):
    exit_code = 3

    def __init__(self, message, section=None, key=None, line=None):
        where = ", ".join(
            part for part in (
                f"section [{section}]" if section else "",
                f"key '{key}'" if key else "",
                f"line {line}" if line else "",
            ) if part
        )
        super().__init__(f"{where}: {message}" if where else message)
        self.section, self.key, self.line = section, key, line


class ScenarioIOError(RisCalcError):
    exit_code = 4


_FLOAT, _INT, _TEXT, _FLOATS = "float", "int", "text", "floats"

_SCHEMA = {
    "global": {
        "carrier_frequency_hz": _FLOAT,
        "outage_threshold_db": _FLOAT,
        "snr_grid_db": _FLOATS,
    },
    "ris": {
        "n_elements": _INT,
        "m1": _FLOAT, "m2": _FLOAT,
        "omega1": _FLOAT, "omega2": _FLOAT,
        "d1_m": _FLOAT, "d2_m": _FLOAT,
        "g1_db": _FLOAT, "g2_db": _FLOAT,
        "efficiency": _FLOAT,
    },
    "modulation": {"preset": _TEXT, "p": _FLOAT, "q": _FLOAT, "label": _TEXT, "series_terms": _INT},
    "mc": {"trials": _INT, "seed": _INT, "chunk_size": _INT},
    "optimize": {
        "n_max": _FLOAT,
        "p_out_th": _FLOATS,
        "avg_snr_db": _FLOAT,
        "start_point": _FLOATS,
        "total_distance_m": _FLOAT,
        "d_min_m": _FLOAT,
        "start_distances_m": _FLOATS,
    },
}
_REPEATABLE = {"ris"}


@dataclass(frozen=True)
class OptimizeBlock:
    n_max: float = 100.0
    p_out_th: tuple = (1e-3,)
    avg_snr_db: float = 100.0
    start_point: Optional[tuple] = None
    total_distance_m: Optional[float] = None
    d_min_m: float = 0.1
    start_distances_m: Optional[tuple] = None


@dataclass(frozen=True)
class ScenarioBundle:
    scenario: Scenario
    modulation: ModulationScheme = BPSK
    series: SeriesTruncation = field(default_factory=lambda: SeriesTruncation(40))
    mc: McRun = field(default_factory=McRun)
    optimize: Optional[OptimizeBlock] = None


def _convert(kind, raw, section, key, line):
    try:
        if kind == _FLOAT:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind == _INT:
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        if kind == _FLOATS:
            values = tuple(float(v) for v in raw.split(","))
            if not values or not all(math.isfinite(v) for v in values):
                raise ValueError
            return values
        return raw
    except ValueError:
        raise ScenarioParseError(
            f"line {line}: section [{section}] key '{key}': cannot read {raw!r} as {kind}"
        ) from None


def _read_sections(text):
    sections = []  # (name, header_line, {key: (value, line)})
    current = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioParseError(f"line {lineno}: malformed section header {raw_line!r}")
            name = line[1:-1].strip().lower()
            if name not in _SCHEMA:
                raise ScenarioValidationError(f"unknown section [{name}]", line=lineno)
            if name not in _REPEATABLE and any(s[0] == name for s in sections):
                raise ScenarioValidationError(f"duplicate section [{name}]", line=lineno)
            current = (name, lineno, {})
            sections.append(current)
            continue
        if "=" not in line:
            raise ScenarioParseError(f"line {lineno}: expected 'key = value', got {raw_line!r}")
        if current is None:
            raise ScenarioParseError(f"line {lineno}: key outside of any section")
        key, value = (part.strip() for part in line.split("=", 1))
        name, _, entries = current
        if key not in _SCHEMA[name]:
            raise ScenarioValidationError("unknown key", section=name, key=key, line=lineno)
        if key in entries:
            raise ScenarioValidationError("duplicate key", section=name, key=key, line=lineno)
        entries[key] = (_convert(_SCHEMA[name][key], value, name, key, lineno), lineno)
    return sections


def _build(factory, section, entries, header_line, **extra):
    kwargs = {k: v for k, (v, _) in entries.items()}
    kwargs.update(extra)
    try:
        return factory(**kwargs)
    except ValidationError as exc:
        key = str(exc).split(" ", 1)[0]
        line = entries[key][1] if key in entries else header_line
        raise ScenarioValidationError(str(exc), section=section, key=key if key in entries else None,
                                      line=line) from None


def _snr_grid(spec, line):
    if len(spec) == 1:
        return spec
    if len(spec) != 3:
        raise ScenarioValidationError(
            "snr_grid_db takes 'start, stop, step' or a single value", "global", "snr_grid_db", line
        )
    start, stop, step = spec
    if not step > 0 or stop < start:
        raise ScenarioValidationError("need step > 0 and stop >= start", "global", "snr_grid_db", line)
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(np.round(start + i * step, 10)) for i in range(count))


def parse_scenario_text(text: str) -> ScenarioBundle:
    sections = _read_sections(text)
    by_name = {}
    for name, header, entries in sections:
        by_name.setdefault(name, []).append((header, entries))

    g_header, g_entries = by_name.get("global", [(None, {})])[0]
    g = {k: v for k, (v, _) in g_entries.items()}
    grid = ()
    if "snr_grid_db" in g:
        grid = _snr_grid(g["snr_grid_db"], g_entries["snr_grid_db"][1])
    threshold_db = g.get("outage_threshold_db", 0.0)
    config = _build(
        GlobalConfig, "global",
        {k: v for k, v in g_entries.items() if k == "carrier_frequency_hz"}, g_header,
        outage_threshold_linear=10.0 ** (threshold_db / 10.0), avg_snr_grid_db=grid,
    )

    if "ris" not in by_name:
        raise ScenarioValidationError("at least one [ris] section is required")
    links = tuple(_build(RisLinkConfig, "ris", entries, header) for header, entries in by_name["ris"])
    scenario = Scenario(config, links)

    modulation, series = BPSK, SeriesTruncation(40)
    if "modulation" in by_name:
        header, entries = by_name["modulation"][0]
        values = {k: v for k, (v, _) in entries.items()}
        preset = values.pop("preset", None)
        terms = values.pop("series_terms", None)
        if preset is not None:
            presets = {"BPSK": BPSK, "QPSK": QPSK}
            if preset.upper() not in presets:
                raise ScenarioValidationError(
                    f"unknown preset {preset!r} (choose BPSK or QPSK)", "modulation", "preset",
                    entries["preset"][1],
                )
            base = presets[preset.upper()]
            values = {"p": base.p, "q": base.q, "label": base.label, **values}
        values.setdefault("p", 1.0)
        values.setdefault("q", 1.0)
        modulation = _build(ModulationScheme, "modulation",
                            {k: (v, entries.get(k, (None, header))[1]) for k, v in values.items()},
                            header)
        if terms is not None:
            series = _build(SeriesTruncation, "modulation", {}, entries["series_terms"][1],
                            terms_per_index=terms)

    mc = McRun()
    if "mc" in by_name:
        header, entries = by_name["mc"][0]
        mc = _build(McRun, "mc", entries, header)

    optimize = None
    if "optimize" in by_name:
        header, entries = by_name["optimize"][0]
        optimize = OptimizeBlock(**{k: v for k, (v, _) in entries.items()})
        for p in optimize.p_out_th:
            if not 0 < p < 1:
                raise ScenarioValidationError("p_out_th entries must lie in (0, 1)", "optimize",
                                              "p_out_th", entries["p_out_th"][1])
        for key in ("start_point", "start_distances_m"):
            value = getattr(optimize, key)
            if value is not None and len(value) != len(links):
                raise ScenarioValidationError("needs one entry per [ris] section", "optimize", key,
                                              entries[key][1])
    return ScenarioBundle(scenario, modulation, series, mc, optimize)


def parse_scenario(path) -> ScenarioBundle:
    """Read and validate a scenario file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioIOError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario_text(text)
