"""Flat key=value run configuration files.

Format: UTF-8 lines of ``key = value``; ``#`` starts a comment; blank
lines ignored; unknown keys rejected.  Keys mirror the simulation config
plus the output paths.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import ConfigError, SimConfig, parse_injections


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


_SIM_KEYS = {
    "good_founders": int,
    "bad_founders": int,
    "liar_founders": int,
    "catalog_size": int,
    "n": int,
    "p": float,
    "penalty": float,
    "threshold": float,
    "floor": float,
    "queries_per_cycle": int,
    "reach": int,
    "total_cycles": int,
    "rng_seed": int,
    "newcomers": parse_injections,
    "acquire_files": _parse_bool,
    "reward": float,
    "cost": float,
}
_PATH_KEYS = ("metrics_csv", "trace_csv")
_REQUIRED = (
    "good_founders",
    "bad_founders",
    "liar_founders",
    "catalog_size",
    "n",
    "p",
    "penalty",
    "threshold",
    "total_cycles",
    "rng_seed",
    "metrics_csv",
)


@dataclass(frozen=True)
class RunConfig:
    sim: SimConfig
    metrics_csv: str
    trace_csv: str | None = None


def parse_run_config(text: str, overrides: dict[str, str] | None = None) -> RunConfig:
    """Parse config text, apply flag overrides, validate everything."""
    raw: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}", f"expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SIM_KEYS and key not in _PATH_KEYS:
            raise ConfigError(key, "unknown key")
        if key in raw:
            raise ConfigError(key, "duplicate key")
        raw[key] = value
    if overrides:
        for key, value in overrides.items():
            if key not in _SIM_KEYS and key not in _PATH_KEYS:
                raise ConfigError(key, "unknown key")
            raw[key] = value

    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(key, "required key missing")

    sim_kwargs = {}
    for key, parse in _SIM_KEYS.items():
        if key in raw:
            try:
                sim_kwargs[key] = parse(raw[key])
            except ValueError as exc:
                raise ConfigError(key, str(exc)) from None
    sim = SimConfig(**sim_kwargs).validate()
    return RunConfig(
        sim=sim,
        metrics_csv=raw["metrics_csv"],
        trace_csv=raw.get("trace_csv"),
    )


def load_run_config(path, overrides: dict[str, str] | None = None) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_run_config(fh.read(), overrides)


def config_keys() -> tuple[str, ...]:
    """Every legal config key (simulation fields plus output paths)."""
    return tuple(_SIM_KEYS) + _PATH_KEYS
