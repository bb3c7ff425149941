"""Dirichlet-to-Neumann cluster spectra on the unit ball."""

import json as _json

from ._dtnbands import (
    ConfigError,
    DtNMatrix,
    NumericalGuard,
    PreconditionError,
    assemble,
    berezin_kernel,
    cluster_spectrum,
    constant_oracle,
    funk_hecke_eigenvalue,
    predict,
)
from ._dtnbands import run as _run

__version__ = "1.0.0"


def run(command, config):
    """Run a CLI command with a config given as a dict or JSON string; returns (code, log)."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _run(command, config)


__all__ = [
    "ConfigError",
    "DtNMatrix",
    "NumericalGuard",
    "PreconditionError",
    "assemble",
    "berezin_kernel",
    "cluster_spectrum",
    "constant_oracle",
    "funk_hecke_eigenvalue",
    "predict",
    "run",
]
