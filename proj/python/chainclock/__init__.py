"""Dissipative spin-chain clocks: spectra, tick statistics, optimization, quenches."""

import json

from ._core import (
    ChainSpec,
    ConfigError,
    ImproperDistribution,
    InvalidInput,
    NoTick,
    NumericalFailure,
    ResumeMismatch,
    Spectrum,
    UnsupportedInput,
    fidelity,
    pst_couplings,
)
from . import _core

__all__ = [
    "ChainSpec",
    "ConfigError",
    "ImproperDistribution",
    "InvalidInput",
    "NoTick",
    "NumericalFailure",
    "ResumeMismatch",
    "Spectrum",
    "UnsupportedInput",
    "fidelity",
    "fit_power_law",
    "optimize",
    "pst_couplings",
    "quench_sweep",
    "tick_statistics",
]


def tick_statistics(spec, mode="relative", value=2.0):
    """Tick moments, precision and resolution as a dict.

    mode is "relative" (horizon = value * asymptotic mean), "absolute"
    (horizon = value) or "asymptotic".
    """
    return json.loads(_core.tick_statistics_json(spec, mode, value))


def optimize(n_sites, config=None, threads=1):
    """Differential-evolution search; config uses the optimizer config keys."""
    return json.loads(_core.optimize_json(n_sites, json.dumps(config or {}), threads))


def quench_sweep(spec, grid=(), threads=1):
    return json.loads(_core.quench_sweep_json(spec, list(grid), threads))


def fit_power_law(x, y):
    return json.loads(_core.fit_power_law_json(list(x), list(y)))
