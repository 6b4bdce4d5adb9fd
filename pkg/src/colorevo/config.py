"""Plain-text key=value configuration shared by the CLI and drivers."""

from __future__ import annotations

import os
from typing import IO

from .errors import ValidationError
from .util import read_lines

# every overridable knob with its documented default
DEFAULTS: dict[str, str] = {
    "sigma_sq": "64.0",  # meaning-model width
    "reward_sigma_sq": "150.0",  # signaling-game reward width
    "steps_per_phase": "1000",
    "batch_size": "50",
    "learning_rate": "0.005",
    "hidden": "25",
    "dataset_size": "300",
    "max_generations": "200",
    "convergence_window": "10",
    "convergence_tol": "0.1",
    "input_scale": "10.0",
    "init_scale": "4.0",
    "transmission_argmax": "false",
    "transmission_with_replacement": "false",
    "reinforce_baseline": "false",
    "beta_steps": "1500",
    "beta_max": "8192.0",
    "max_words": "330",
    "frontier_tol": "1e-6",
    "frontier_max_sweeps": "5000",
    "per_k": "100",
    "k_low": "3",
    "k_high": "10",
    "complexity_low": "0.84",
    "complexity_high": "2.65",
    "gnid_threshold": "0.29",
    "fixture_count": "110",
}


def parse_config(source: str | os.PathLike | IO[str] | None) -> dict[str, str]:
    """Merge a key=value file (hash comments allowed) over the defaults."""
    merged = dict(DEFAULTS)
    if source is None:
        return merged
    for lineno, line in enumerate(read_lines(source), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        key = key.strip()
        if key not in DEFAULTS:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
        merged[key] = value.strip()
    return merged


def cfg_float(cfg: dict[str, str], key: str) -> float:
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ValidationError(f"config {key}={cfg[key]!r} is not a number") from exc


def cfg_int(cfg: dict[str, str], key: str) -> int:
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise ValidationError(f"config {key}={cfg[key]!r} is not an integer") from exc


def cfg_bool(cfg: dict[str, str], key: str) -> bool:
    value = cfg[key].lower()
    if value in ("true", "1", "yes"):
        return True
    if value in ("false", "0", "no"):
        return False
    raise ValidationError(f"config {key}={cfg[key]!r} is not a boolean")
