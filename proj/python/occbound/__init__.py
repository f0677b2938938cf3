"""Occupancy processes, spin systems and their mean-field bounds.

Thin wrapper over the compiled ``_core`` module. Report-producing calls return
plain dicts decoded from the same JSON the command-line tool writes.
"""

import json

from ._core import (
    AdmissibilityError,
    CapacityError,
    Model,
    ModelFormatError,
    convergence,
    discretise,
    exact_marginals,
    mean_field,
    mean_field_ode,
    monotone_violations,
    set_num_threads,
    simulate,
    spin_marginals,
)
from . import _core

__all__ = [
    "AdmissibilityError",
    "CapacityError",
    "Model",
    "ModelFormatError",
    "check",
    "convergence",
    "discretise",
    "exact_marginals",
    "load",
    "marginal_bound",
    "mean_field",
    "mean_field_ode",
    "monotone_violations",
    "path_orthant",
    "set_num_threads",
    "simulate",
    "single_time_orthant",
    "spin_marginals",
]


def load(path):
    """Reads a model JSON file."""
    return Model.from_file(str(path))


def check(model, samples=4096, tol=1e-9, seed=0):
    """Hypothesis certification report."""
    return json.loads(_core.check_json(model, samples, tol, seed))


def marginal_bound(model, horizon, tol=1e-10, seed=0):
    """Margins p - E X over sites and times up to ``horizon`` (steps, or time for spin models)."""
    return json.loads(_core.marginal_bound_json(model, horizon, tol, seed))


def single_time_orthant(model, t, tol=1e-10, seed=0):
    return json.loads(_core.single_time_orthant_json(model, t, tol, seed))


def path_orthant(model, m, tol=1e-10, seed=0):
    return json.loads(_core.path_orthant_json(model, m, tol, seed))
