"""Experiment configuration files and the four shipped presets.

Configs are flat key = value files with sections [experiment] plus one of
[gd], [flow] or [restart] matching the run kind.  Unknown keys are rejected
and missing keys are reported by name.  The presets cover the three
canonical initialization-norm regimes and the restart-vs-descent comparison.
"""

import configparser
from dataclasses import dataclass
from importlib import resources

from .restart import RestartConfig

PRESET_NAMES = ("example1_lownorm", "example1_midnorm", "example1_highnorm", "figure5")

RUN_KINDS = ("gd", "restart", "flow")


class ConfigError(ValueError):
    """Bad experiment configuration (parse failure or invalid field)."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Validated description of one experiment (possibly several series)."""

    name: str
    d: int
    p: int
    m: int
    rank_planted: int
    master_seed: int
    trials: int
    run_kind: str
    # gd / flow series parameters
    eta: float | None = None
    iters: int | None = None
    dt: float | None = None
    steps: int | None = None
    log_every: int = 100
    init_fro_norm: float | None = None
    init_ranks: tuple = ()
    # restart parameters (seed is a placeholder, replaced per trial)
    restart: RestartConfig | None = None


def _parse_value(raw, kind, section, key):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == "int_list":
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if not items:
                raise ValueError("empty list")
            return tuple(int(s) for s in items)
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}: {exc}") from None


def _read_section(parser, section, schema, defaults=None):
    if not parser.has_section(section):
        raise ConfigError(f"missing section [{section}]")
    got = dict(parser.items(section))
    out = dict(defaults or {})
    for key in got:
        if key not in schema:
            raise ConfigError(f"[{section}] unknown key {key!r}")
    for key, kind in schema.items():
        if key in got:
            out[key] = _parse_value(got[key], kind, section, key)
        elif key not in out:
            raise ConfigError(f"[{section}] missing required key {key!r}")
    return out


_EXPERIMENT_SCHEMA = {
    "name": str, "d": int, "p": int, "m": int, "rank_planted": int,
    "master_seed": int, "trials": int, "run_kind": str,
}
_GD_SCHEMA = {
    "eta": float, "iters": int, "log_every": int,
    "init_fro_norm": float, "init_ranks": "int_list",
}
_FLOW_SCHEMA = {
    "dt": float, "steps": int, "log_every": int,
    "init_fro_norm": float, "init_ranks": "int_list",
}
_RESTART_SCHEMA = {
    "eta": float, "budget": int, "window": int, "ratio_threshold": float,
    "init_rank": int, "init_norm": float, "rank_step": int,
    "norm_factor": float, "floor_rank": int, "log_every": int,
}


def preset_path(name):
    """Filesystem path of a bundled preset config."""
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return resources.files("matsense").joinpath("presets", f"{name}.cfg")


def load_config(path):
    """Parse and validate an experiment config file (or bundled preset name)."""
    import os

    if not os.path.exists(path) and "/" not in str(path) and str(path) in PRESET_NAMES:
        path = preset_path(str(path))
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"parse error in {path}: {exc}") from None

    exp = _read_section(parser, "experiment", _EXPERIMENT_SCHEMA)
    for key in ("d", "p", "m", "rank_planted", "trials"):
        if exp[key] < 1:
            raise ConfigError(f"[experiment] {key} must be >= 1, got {exp[key]}")
    if exp["rank_planted"] > exp["p"]:
        raise ConfigError("[experiment] rank_planted must not exceed p")
    if exp["run_kind"] not in RUN_KINDS:
        raise ConfigError(f"[experiment] run_kind must be one of {RUN_KINDS}")

    kind = exp["run_kind"]
    extra_sections = {s for s in parser.sections()} - {"experiment", kind}
    if extra_sections:
        raise ConfigError(f"unexpected section(s): {sorted(extra_sections)}")

    if kind == "gd":
        sec = _read_section(parser, "gd", _GD_SCHEMA, defaults={"log_every": 100})
        _check_series(sec, exp, require=("eta", "iters"))
        return ExperimentSpec(**exp, eta=sec["eta"], iters=sec["iters"],
                              log_every=sec["log_every"],
                              init_fro_norm=sec["init_fro_norm"],
                              init_ranks=sec["init_ranks"])
    if kind == "flow":
        sec = _read_section(parser, "flow", _FLOW_SCHEMA, defaults={"log_every": 100})
        _check_series(sec, exp, require=("dt", "steps"))
        return ExperimentSpec(**exp, dt=sec["dt"], steps=sec["steps"],
                              log_every=sec["log_every"],
                              init_fro_norm=sec["init_fro_norm"],
                              init_ranks=sec["init_ranks"])
    sec = _read_section(parser, "restart", _RESTART_SCHEMA, defaults={"log_every": 100})
    if sec["init_rank"] > min(exp["d"], exp["p"]):
        raise ConfigError("[restart] init_rank must not exceed min(d, p)")
    try:
        template = RestartConfig(
            eta=sec["eta"], budget=sec["budget"], window=sec["window"],
            ratio_threshold=sec["ratio_threshold"], init_rank=sec["init_rank"],
            init_norm=sec["init_norm"], rank_step=sec["rank_step"],
            norm_factor=sec["norm_factor"], floor_rank=sec["floor_rank"],
            seed=exp["master_seed"])
    except ValueError as exc:
        raise ConfigError(f"[restart] {exc}") from None
    return ExperimentSpec(**exp, log_every=sec["log_every"], restart=template)


def _check_series(sec, exp, require):
    for key in require:
        if sec[key] <= 0:
            raise ConfigError(f"{key} must be positive, got {sec[key]}")
    if sec["log_every"] < 1:
        raise ConfigError("log_every must be >= 1")
    if sec["init_fro_norm"] <= 0:
        raise ConfigError("init_fro_norm must be positive")
    for r in sec["init_ranks"]:
        if not 1 <= r <= min(exp["d"], exp["p"]):
            raise ConfigError(f"init rank {r} out of range for d={exp['d']}, p={exp['p']}")
