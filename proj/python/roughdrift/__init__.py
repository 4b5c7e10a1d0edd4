"""Python access to the roughdrift C++ core."""

import json as _json

from ._core import (
    RoughDriftError,
    contraction,
    corpus,
    default_config,
    girsanov_check,
    heat_solve,
    kernel_beta,
    khasminskii_constant,
    prodi_serrin,
    set_workers,
    simulate,
    suite_names,
)
from ._core import run_suite as _run_suite


def run_suite(name, config=None, out=""):
    """Run a suite; the report comes back as a list of decoded JSON lines."""
    res = _run_suite(name, config, out)
    res["report"] = [_json.loads(line) for line in res["report"].splitlines() if line]
    return res


__all__ = [
    "RoughDriftError",
    "contraction",
    "corpus",
    "default_config",
    "girsanov_check",
    "heat_solve",
    "kernel_beta",
    "khasminskii_constant",
    "prodi_serrin",
    "run_suite",
    "set_workers",
    "simulate",
    "suite_names",
]
