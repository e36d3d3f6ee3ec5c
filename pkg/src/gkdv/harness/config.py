"""INI experiment configuration: grammar, defaults and validation.

A config file has up to six sections.  Every key is optional; anything not
given falls back to the defaults registered for the experiment kind, and any
key not in the schema is rejected with its line number::

    [experiment]
    kind = conservation        ; required, see KINDS
    id = my-run                ; defaults to the kind
    seed = 0                   ; unsigned 64-bit

    [grid]
    box_length = 256
    n_points = 1024            ; power of two

    [solver]
    dt = 0.0025
    t_final = 10
    record_stride = 400
    dealias_ratio = 3
    nonlinear = true
    filter = false

    [datum]
    family = gaussian          ; gaussian | sech | shell | random | power_tail
    amplitude = 1.0            ; family-specific keys, see DATUM_KEYS

    [params]
    ...                        ; kind-specific keys, see PARAM_SCHEMA

    [output]
    dir = results/my-run
    plots = true
    trajectory = false

Values are numbers (``inf`` allowed), booleans (``true``/``false``) or
comma-separated lists.
"""

from __future__ import annotations

import configparser
import copy
import math
import re
from dataclasses import dataclass
from pathlib import Path

__all__ = ["ConfigError", "ExperimentConfig", "KINDS", "load_config", "default_config", "parse_config_text"]

U64_MAX = 2**64 - 1


class ConfigError(ValueError):
    """Invalid configuration; the message names the file, line and key when known."""


def _float(s: str) -> float:
    v = float(s)
    if math.isnan(v):
        raise ValueError("nan is not allowed")
    return v


def _int(s: str) -> int:
    f = float(s)
    if not f.is_integer():
        raise ValueError(f"{s!r} is not an integer")
    return int(f)


def _bool(s: str) -> bool:
    t = s.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"{s!r} is not a boolean")


def _seed(s: str) -> int:
    v = int(s.strip())
    if not 0 <= v <= U64_MAX:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return v


def _str(s: str) -> str:
    return s.strip()


def _floats(s):
    if isinstance(s, (list, tuple)):
        return [float(v) for v in s]
    items = [t for t in re.split(r"[,\s]+", s.strip()) if t]
    return [_float(t) for t in items]


def _ints(s):
    return [_int(str(v)) for v in (_floats(s) if not isinstance(s, (list, tuple)) else s)]


FLOAT, INT, BOOL, STR, SEED, FLOATS, INTS = _float, _int, _bool, _str, _seed, _floats, _ints

BASE_SCHEMA = {
    "experiment": {"kind": STR, "id": STR, "seed": SEED},
    "grid": {"box_length": FLOAT, "n_points": INT},
    "solver": {
        "dt": FLOAT,
        "t_final": FLOAT,
        "record_stride": INT,
        "dealias_ratio": FLOAT,
        "nonlinear": BOOL,
        "filter": BOOL,
    },
    "output": {"dir": STR, "plots": BOOL, "trajectory": BOOL},
}

DATUM_KEYS = {
    "gaussian": {"amplitude": FLOAT, "width": FLOAT, "center": FLOAT, "l2": FLOAT},
    "sech": {"amplitude": FLOAT, "width": FLOAT, "center": FLOAT, "l2": FLOAT},
    "shell": {"xi_min": FLOAT, "xi_max": FLOAT, "p": FLOAT, "taper": FLOAT, "l2": FLOAT},
    "random": {"xi_cut": FLOAT, "envelope": FLOAT, "l2": FLOAT},
    "power_tail": {"amplitude": FLOAT, "onset": FLOAT, "cutoff": FLOAT, "cutoff_width": FLOAT},
}

PARAM_SCHEMA = {
    "conservation": {"mass_tol": FLOAT, "energy_tol": FLOAT},
    "scaling": {"lam": FLOAT, "tol": FLOAT, "rescale_tol": FLOAT},
    "decay": {"p": FLOATS, "t_lo": FLOAT, "t_hi": FLOAT, "n_times": INT, "t_min": FLOAT,
              "tol": FLOAT, "min_decades": FLOAT},
    "small_data": {"epsilon": FLOATS, "ratio_spread_tol": FLOAT, "tv_factor": FLOAT},
    "local_laws": {"factors": INTS, "tol": FLOAT},
    "morawetz_truncated": {"R": FLOATS, "transition_width": FLOAT, "target": FLOAT, "tol": FLOAT},
    "morawetz_interaction": {"R": FLOAT, "R1": FLOAT, "chi_width": FLOAT, "Ntilde": FLOAT,
                             "factors": INTS, "tol": FLOAT},
    "interaction_kernel": {"R": FLOAT, "R1": FLOAT, "chi_width": FLOAT, "Ntilde": FLOAT,
                           "even_tol": FLOAT, "deriv_tol": FLOAT, "match_tol": FLOAT},
    "vp_norm": {"instances": INT, "max_snapshots": INT, "p": FLOATS, "tol": FLOAT},
    "envelope": {"delta": FLOAT, "shell": INT, "fields": INT, "tol": FLOAT},
    "stability": {"epsilon": FLOATS, "response_tol": FLOAT},
    "positivity": {"fields": INT, "gap_tol": FLOAT},
    "admissible": {},
}

KINDS = tuple(PARAM_SCHEMA)

_COMMON = {
    "experiment": {"seed": 0},
    "grid": {"box_length": 256.0, "n_points": 1024},
    "solver": {"dt": 0.005, "t_final": 1.0, "record_stride": 1, "dealias_ratio": 3.0,
               "nonlinear": True, "filter": False},
    "datum": {"family": "gaussian"},
    "params": {},
    "output": {"plots": True, "trajectory": False},
}

# Defaults per kind are sized so each criterion runs in well under a minute.
_KIND_DEFAULTS = {
    "conservation": {
        "solver": {"dt": 0.0025, "t_final": 10.0, "record_stride": 400},
        "datum": {"family": "gaussian", "amplitude": 1.0, "width": 1.0, "l2": 1.0},
        "params": {"mass_tol": 1e-8, "energy_tol": 1e-6},
    },
    "scaling": {
        "solver": {"dt": 0.004, "t_final": 2.0, "record_stride": 500},
        "datum": {"family": "gaussian", "amplitude": 1.0, "width": 4.0, "l2": 1.0},
        "params": {"lam": 2.0, "tol": 1e-6, "rescale_tol": 1e-11},
    },
    "decay": {
        "grid": {"box_length": 4096.0, "n_points": 32768},
        "solver": {"nonlinear": False},
        "datum": {"family": "shell", "xi_min": 0.02, "xi_max": 4.0, "taper": 0.5, "l2": 1.0},
        "params": {"p": [math.inf, 6.0], "t_lo": 0.01, "t_hi": 100.0, "n_times": 60,
                   "tol": 0.05, "min_decades": 1.5},
    },
    "small_data": {
        "solver": {"dt": 0.005, "t_final": 10.0, "record_stride": 20},
        "datum": {"family": "gaussian", "amplitude": 1.0, "width": 1.0},
        "params": {"epsilon": [0.02, 0.04, 0.08], "ratio_spread_tol": 2.0, "tv_factor": 3.0},
    },
    "local_laws": {
        "grid": {"box_length": 128.0, "n_points": 1024},
        "solver": {"dt": 0.0005, "t_final": 0.2, "record_stride": 2},
        "datum": {"family": "gaussian", "amplitude": 1.0, "width": math.sqrt(2.0)},
        "params": {"factors": [4, 2, 1], "tol": 0.3},
    },
    "morawetz_truncated": {
        "grid": {"box_length": 512.0, "n_points": 2048},
        "solver": {"dt": 0.0005, "t_final": 0.02, "record_stride": 1},
        "datum": {"family": "power_tail", "amplitude": 0.5},
        "params": {"R": [8.0, 16.0, 32.0, 64.0], "transition_width": 1.0, "target": -2.0, "tol": 0.4},
    },
    "morawetz_interaction": {
        "grid": {"box_length": 128.0, "n_points": 1024},
        "solver": {"dt": 0.0005, "t_final": 0.2, "record_stride": 4},
        "datum": {"family": "gaussian", "amplitude": 1.0, "width": math.sqrt(2.0)},
        "params": {"R": 4.0, "R1": 2.0, "Ntilde": 4.0, "factors": [4, 2, 1], "tol": 0.3},
    },
    "interaction_kernel": {
        "grid": {"box_length": 64.0, "n_points": 256},
        "datum": {"family": "random", "xi_cut": 2.0, "envelope": 4.0, "l2": 1.0},
        "params": {"R": 4.0, "R1": 2.0, "Ntilde": 4.0, "even_tol": 1e-10,
                   "deriv_tol": 1e-8, "match_tol": 1e-8},
    },
    "vp_norm": {
        "grid": {"box_length": 32.0, "n_points": 64},
        "params": {"instances": 50, "max_snapshots": 12, "p": [1.0, 1.5, 2.0, 3.0, 4.0], "tol": 1e-12},
    },
    "envelope": {
        "params": {"delta": 1.0 / 40.0, "shell": 0, "fields": 20, "tol": 1e-12},
    },
    "stability": {
        "solver": {"dt": 0.0025, "t_final": 2.0, "record_stride": 20},
        "datum": {"family": "gaussian", "amplitude": 1.0, "width": 1.0, "l2": 1.0},
        "params": {"epsilon": [1e-3, 1e-4], "response_tol": 1.5},
    },
    "positivity": {
        "datum": {"family": "random", "xi_cut": 4.0, "envelope": 8.0},
        "params": {"fields": 100, "gap_tol": 1e-9},
    },
    "admissible": {},
}


@dataclass
class ExperimentConfig:
    kind: str
    id: str
    seed: int
    grid: dict
    solver: dict
    datum: dict
    params: dict
    output: dict
    source: str = "<defaults>"

    def as_dict(self) -> dict:
        return {
            "experiment": {"kind": self.kind, "id": self.id, "seed": self.seed},
            "grid": dict(self.grid),
            "solver": dict(self.solver),
            "datum": dict(self.datum),
            "params": dict(self.params),
            "output": dict(self.output),
        }

    def with_value(self, axis: str, value) -> "ExperimentConfig":
        """Copy with one key replaced; ``axis`` is ``section.key`` or an unambiguous bare key."""
        section, key = resolve_axis(self, axis)
        d = self.as_dict()
        schema = _schema_for(self.kind, d["datum"].get("family"))
        conv = schema[section][key]
        if conv in (FLOATS, INTS):
            value = conv([value] if not isinstance(value, (list, tuple)) else value)
        elif conv is not STR:
            value = conv(str(value))
        d[section][key] = value
        return _build(d, self.source)


def _schema_for(kind, family):
    schema = copy.deepcopy(BASE_SCHEMA)
    schema["params"] = PARAM_SCHEMA[kind]
    fam_keys = DATUM_KEYS.get(family, {})
    schema["datum"] = {"family": STR, **fam_keys}
    return schema


def resolve_axis(cfg: ExperimentConfig, axis: str):
    schema = _schema_for(cfg.kind, cfg.datum.get("family"))
    if "." in axis:
        section, key = axis.split(".", 1)
        if section not in schema or key not in schema[section]:
            raise ConfigError(f"unknown sweep axis {axis!r} for kind {cfg.kind!r}")
        return section, key
    hits = [(s, axis) for s, keys in schema.items() if axis in keys]
    if not hits:
        raise ConfigError(f"unknown sweep axis {axis!r} for kind {cfg.kind!r}")
    if len(hits) > 1:
        raise ConfigError(f"sweep axis {axis!r} is ambiguous; use one of {[s + '.' + k for s, k in hits]}")
    return hits[0]


def default_config(kind: str) -> ExperimentConfig:
    if kind not in PARAM_SCHEMA:
        raise ConfigError(f"unknown experiment kind {kind!r}; choose from {list(KINDS)}")
    d = copy.deepcopy(_COMMON)
    for section, values in copy.deepcopy(_KIND_DEFAULTS[kind]).items():
        if section == "datum" and values.get("family") != d["datum"].get("family"):
            d["datum"] = {}
        d[section].update(values)
    d["experiment"].update({"kind": kind, "id": kind})
    return _build(d, "<defaults>")


def _build(d: dict, source: str) -> ExperimentConfig:
    out = dict(d["output"])
    out.setdefault("dir", str(Path("results") / d["experiment"]["id"]))
    cfg = ExperimentConfig(
        kind=d["experiment"]["kind"],
        id=d["experiment"]["id"],
        seed=d["experiment"]["seed"],
        grid=d["grid"],
        solver=d["solver"],
        datum=d["datum"],
        params=d["params"],
        output=out,
        source=source,
    )
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    n = cfg.grid["n_points"]
    if n < 4 or n & (n - 1):
        raise ConfigError(f"{cfg.source}: [grid] n_points must be a power of two >= 4, got {n}")
    if not cfg.grid["box_length"] > 0:
        raise ConfigError(f"{cfg.source}: [grid] box_length must be positive")
    s = cfg.solver
    if not (s["dt"] > 0 and s["t_final"] > 0):
        raise ConfigError(f"{cfg.source}: [solver] dt and t_final must be positive")
    if s["record_stride"] < 1:
        raise ConfigError(f"{cfg.source}: [solver] record_stride must be >= 1")
    if s["dealias_ratio"] < 3:
        raise ConfigError(f"{cfg.source}: [solver] dealias_ratio must be >= 3")
    fam = cfg.datum.get("family")
    if fam not in DATUM_KEYS:
        raise ConfigError(f"{cfg.source}: [datum] unknown family {fam!r}; choose from {sorted(DATUM_KEYS)}")
    for key in ("factors",):
        if key in cfg.params and not cfg.params[key]:
            raise ConfigError(f"{cfg.source}: [params] {key} must not be empty")


def _key_lines(text: str) -> dict:
    """Map ``(section, key)`` to the 1-based line where the key is defined."""
    where, section = {}, None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"\s*([^=:;#\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            where[(section, m.group(1).strip())] = i
    return where


def parse_config_text(text: str, source: str = "<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    parser.optionxform = str  # keys such as R and Ntilde are case-sensitive
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    lines = _key_lines(text)

    def loc(section, key=None):
        ln = lines.get((section, key)) if key else None
        return f"{source}:{ln}" if ln else source

    for section in parser.sections():
        if section not in ("experiment", "grid", "solver", "datum", "params", "output"):
            raise ConfigError(f"{source}: unknown section [{section}]")
    if not parser.has_option("experiment", "kind"):
        raise ConfigError(f"{source}: [experiment] kind is required")
    kind = parser.get("experiment", "kind").strip()
    if kind not in PARAM_SCHEMA:
        raise ConfigError(f"{loc('experiment', 'kind')}: unknown experiment kind {kind!r}; choose from {list(KINDS)}")
    d = default_config(kind).as_dict()
    d["output"].pop("dir", None)
    if parser.has_option("datum", "family"):
        fam = parser.get("datum", "family").strip()
        if fam != d["datum"].get("family"):
            d["datum"] = {"family": fam}
        if fam not in DATUM_KEYS:
            raise ConfigError(f"{loc('datum', 'family')}: unknown datum family {fam!r}; choose from {sorted(DATUM_KEYS)}")
    schema = _schema_for(kind, d["datum"]["family"])
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in schema[section]:
                raise ConfigError(
                    f"{loc(section, key)}: unknown key {key!r} in [{section}]; "
                    f"allowed: {sorted(schema[section])}"
                )
            try:
                d[section][key] = schema[section][key](raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{loc(section, key)}: bad value for [{section}] {key}: {exc}") from None
    if "id" not in dict(parser.items("experiment")):
        d["experiment"]["id"] = kind
    return _build(d, source)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))
