"""Configuration management: TOML config at ~/.config/fgwkit/fgwkit.toml."""

from __future__ import annotations

import os
import sys
from pathlib import Path
from typing import Any

import tomli_w

from fgwkit.core.exceptions import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_DEFAULT_CONFIG: dict[str, Any] = {
    "solver": {
        "max_iter": 1000,
        "rel_tol": 1e-9,
    },
    "barycenter": {
        "outer_iters": 30,
        "rel_tol": 1e-7,
    },
    "clustering": {
        "threshold": 1.1,
        "max_iters": 20,
    },
    "sbm": {
        "p_in": 0.8,
        "p_out": 0.05,
        "label_noise": 0.5,
    },
    "parallel": {
        "workers": 0,  # 0 = available parallelism
    },
}


def get_config_dir() -> Path:
    """Return the config directory (not created here)."""
    return Path(os.environ.get("FGWKIT_CONFIG_DIR", "~/.config/fgwkit")).expanduser()


def get_config_path() -> Path:
    """Return the path to the config TOML file."""
    return get_config_dir() / "fgwkit.toml"


def default_config() -> dict[str, Any]:
    """Return a fresh copy of the built-in defaults."""
    return _deep_copy_dict(_DEFAULT_CONFIG)


def load_config() -> dict[str, Any]:
    """Load configuration from TOML file, returning defaults if not found."""
    config_path = get_config_path()
    if not config_path.exists():
        return default_config()
    try:
        with open(config_path, "rb") as f:
            user_config = tomllib.load(f)
        return _merge_config(default_config(), user_config)
    except Exception as e:
        raise ConfigError(f"Failed to load config: {e}") from e


def save_config(config: dict[str, Any]) -> Path:
    """Save configuration to TOML file and return its path."""
    config_path = get_config_path()
    try:
        config_path.parent.mkdir(parents=True, exist_ok=True)
        with open(config_path, "wb") as f:
            tomli_w.dump(config, f)
    except Exception as e:
        raise ConfigError(f"Failed to save config: {e}") from e
    return config_path


def get_setting(config: dict[str, Any], section: str, key: str) -> Any:
    """Read one setting, falling back to the built-in default."""
    value = config.get(section, {}).get(key)
    if value is None:
        return _DEFAULT_CONFIG[section][key]
    return value


def resolve_workers(config: dict[str, Any], workers: int | None) -> int:
    """Resolve a worker count: explicit flag, then config, then CPU count."""
    if workers is None:
        workers = int(get_setting(config, "parallel", "workers"))
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def _merge_config(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    """Deep-merge override into base."""
    for key, value in override.items():
        if key in base and isinstance(base[key], dict) and isinstance(value, dict):
            _merge_config(base[key], value)
        else:
            base[key] = value
    return base


def _deep_copy_dict(d: dict[str, Any]) -> dict[str, Any]:
    """Simple deep copy for nested dicts of simple types."""
    result: dict[str, Any] = {}
    for k, v in d.items():
        if isinstance(v, dict):
            result[k] = _deep_copy_dict(v)
        else:
            result[k] = v
    return result
