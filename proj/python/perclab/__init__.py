"""Python access to the perclab percolation library."""

import json

from ._perclab import (
    DomainError,
    GraphFamily,
    GraphPatch,
    ParameterError,
    ParseError,
    __version__,
    build_patch,
    delta,
    growth_of,
    heat_kernel,
    list_experiments,
    schedule,
    sphere_connection,
    sprinkle,
)
from ._perclab import run_config as _run_config


def run_config(text, record_timing=True):
    """Run an INI experiment config; returns (passed, config_hash, records as dicts)."""
    passed, config_hash, lines = _run_config(text, record_timing)
    return passed, config_hash, [json.loads(line) for line in lines]


__all__ = [
    "DomainError",
    "GraphFamily",
    "GraphPatch",
    "ParameterError",
    "ParseError",
    "__version__",
    "build_patch",
    "delta",
    "growth_of",
    "heat_kernel",
    "list_experiments",
    "run_config",
    "schedule",
    "sphere_connection",
    "sprinkle",
]
