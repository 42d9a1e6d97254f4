"""NOON-state preparation with a single multilevel qudit.

Configurations are plain dicts with the same blocks as the JSON files the
command-line tool reads (system, protocol, errors, decoherence, integrator,
output).
"""

import json

import numpy as np

from ._core import (
    ConfigError,
    Error,
    ParameterError,
    StiffnessError,
    TruncationError,
    sensitivity_q,
    two_level_transfer,
)
from . import _core

__all__ = [
    "Error", "ConfigError", "ParameterError", "TruncationError", "StiffnessError",
    "params", "resolved_config", "run", "sweep", "validate", "sensitivity_q", "two_level_transfer",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def params(config):
    return _core.params(_text(config))


def resolved_config(config):
    return json.loads(_core.resolved_config(_text(config)))


def run(config):
    out = _core.run(_text(config))
    for key in ("t", "F", "populations", "nbar", "leakage"):
        out[key] = np.asarray(out[key])
    return out


def sweep(config, param, lo, hi, points, jobs=1):
    return _core.sweep(_text(config), param, lo, hi, points, jobs)


def validate(config):
    return [dict(name=n, ok=ok, detail=d) for n, ok, d in _core.validate(_text(config))]
