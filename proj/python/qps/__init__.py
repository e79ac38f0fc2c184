"""Quasi-periodic Schrodinger operators and Aubry duality."""

import json

from ._qps import (
    Model,
    QpsError,
    arcsine_mass,
    conjugation_mismatch,
    dual_matrix,
    dual_spectrum,
    initial_step,
    multiscale,
    sha256_hex,
    subcommands,
)
from ._qps import _run_json


def run(config, subcommand="all"):
    """Run a pipeline subcommand on a config file and return the record as a dict."""
    return json.loads(_run_json(str(config), subcommand))


__all__ = [
    "Model",
    "QpsError",
    "arcsine_mass",
    "conjugation_mismatch",
    "dual_matrix",
    "dual_spectrum",
    "initial_step",
    "multiscale",
    "run",
    "sha256_hex",
    "subcommands",
]
