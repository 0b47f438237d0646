"""Shared config helper for the shapeinv scripts.

Usage:
    from lib.load_config import load_config, get_config, require_config

    config = load_config()                                  # auto-discovers config.json
    tol = get_config(config, "tolerances.constancy", 1e-9)  # default if missing
    n = require_config(config, "spectral.n")                # ConfigError if missing
"""

import json
import os

from lib.errors import ConfigError

# Built-in defaults; config.example.json mirrors these.
DEFAULTS = {
    "tolerances": {
        "constancy": 1e-9,
        "compatibility": 1e-10,
        "gauge": 1e-9,
        "ode": 1e-8,
        "spectrum": 1e-4,
        "gap": 1e-3,
    },
    "grids": {
        "radial": {"min": 0.05, "max": 4.0, "n": 60, "spacing": "log"},
        "trigonometric": {"min": 0.05, "max": None, "n": 60, "spacing": "linear"},
        "hyperbolic": {"min": 0.05, "max": 4.0, "n": 60, "spacing": "log"},
    },
    "series": {"tolerance": 1e-14, "maxTerms": 400, "margin": 0.05},
    "spectral": {
        "xMin": 1e-3,
        "n": 4000,
        "k": 5,
        "headroom": 50.0,
        "richardson": True,
    },
    "sweep": {
        "g": {
            "radial-oscillator": ["2", "5/2", "3", "7/2"],
            "trig-dpt": ["5/3", "7/3", "8/3", "10/3"],
            "hyp-dpt": ["5/3", "7/3", "8/3", "10/3"],
        },
        "h": {"trig-dpt": ["3/2", "5/2", "7/2", "9/2"]},
        "hOffsets": {"hyp-dpt": [0, 1, 2, 3]},
        "lMax": 8,
        "continuousL": [0.5, 1.5, 2.7],
    },
}


def repo_root():
    """Repository root, derived from this file's location: lib/ -> scripts/ -> root."""
    return os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def load_config(config_path=None):
    """Load config.json, falling back to config.example.json, then to {}.

    An explicit config_path wins when it exists. The loaded mapping is not
    merged with DEFAULTS here; callers read through get_config with a
    default, or through setting() which consults DEFAULTS.
    """
    if config_path and os.path.exists(config_path):
        with open(config_path) as f:
            return json.load(f)

    for name in ("config.json", "config.example.json"):
        path = os.path.join(repo_root(), name)
        if os.path.exists(path):
            with open(path) as f:
                return json.load(f)

    return {}


def get_config(config, dotted_key, default=None):
    """Read a dotted key from the config dict (e.g. 'tolerances.constancy')."""
    keys = dotted_key.split(".")
    value = config
    for key in keys:
        if isinstance(value, dict):
            value = value.get(key)
        else:
            return default
        if value is None:
            return default
    return value


def setting(config, dotted_key):
    """Read a dotted key, falling back to the built-in DEFAULTS."""
    return get_config(config, dotted_key, get_config(DEFAULTS, dotted_key))


def require_config(config, dotted_key):
    """Read a dotted key from the config dict, raise ConfigError if missing or empty."""
    value = get_config(config, dotted_key)
    if value is None or value == "" or value == [] or value == {}:
        raise ConfigError(f"'{dotted_key}' is missing or empty in the config")
    return value
