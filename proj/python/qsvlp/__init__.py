"""Quasi-synchronous visible light positioning: bounds, estimators, figures.

Scenarios are plain dicts following the scenario schema (see
docs/scenario_schema.md); every function also accepts a JSON string.
"""

import json

from . import _core
from ._core import ConfigError, DomainError, EstimationError, RankDeficientError

__all__ = [
    "ConfigError",
    "DomainError",
    "EstimationError",
    "RankDeficientError",
    "crlb_surface",
    "default_scenario",
    "energy_integrals",
    "estimate",
    "fim",
    "fim_qs",
    "normalize_scenario",
    "run_figure",
    "run_trials",
    "sqrt_crlb",
    "tilted_scenario",
    "validate",
]


def _text(scenario):
    if scenario is None:
        return _core.default_scenario()
    return scenario if isinstance(scenario, str) else json.dumps(scenario)


def default_scenario():
    """The built-in reference scenario as a dict."""
    return json.loads(_core.default_scenario())


def tilted_scenario(theta):
    """Default scenario with every LED tilted by theta towards the room centre."""
    return json.loads(_core.tilted_scenario(theta))


def normalize_scenario(scenario=None, overrides=()):
    """Complete, validated scenario after applying "key=value" overrides."""
    return json.loads(_core.normalize_scenario(_text(scenario), list(overrides)))


def energy_integrals(amplitude, duration, center_frequency):
    """(E1, E2, E3) of the raised-cosine pulse."""
    return _core.energy_integrals(amplitude, duration, center_frequency)


def fim(scenario=None):
    """4x4 Fisher information (numpy array) for [x, y, z, offset]."""
    return _core.fim(_text(scenario))


def fim_qs(scenario=None):
    """3x3 reduced information with the clock offset unknown."""
    return _core.fim_qs(_text(scenario))


def sqrt_crlb(scenario=None):
    """Square root of the position MSE bound, meters, in the scenario's mode."""
    return _core.sqrt_crlb(_text(scenario))


def crlb_surface(scenario=None, spacing=0.25):
    """List of (x, y, sqrt_crlb or None) over the floor grid."""
    return _core.crlb_surface(_text(scenario), spacing)


def estimate(scenario=None, estimator="two_step", seed=1, trial=0):
    """One position estimate from one synthesized noise realization."""
    return _core.estimate(_text(scenario), estimator, seed, trial)


def run_trials(scenario=None, estimator="two_step", trials=200, seed=1, threads=0):
    """Monte Carlo RMSE with per-trial errors."""
    return _core.run_trials(_text(scenario), estimator, trials, seed, threads)


def validate(scenario=None, seed=1):
    """Invariant report as a dict."""
    return json.loads(_core.validate(_text(scenario), seed))


def run_figure(figure, seed=1, trials=200, spacing=0.25, threads=0):
    """(CSV text, metadata dict) of one figure."""
    csv, meta = _core.run_figure(figure, seed, trials, spacing, threads)
    return csv, json.loads(meta)
