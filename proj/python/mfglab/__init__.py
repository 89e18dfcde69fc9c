"""Constrained linear-quadratic mean-field games: solver, oracles, population experiments."""

import json as _json

from ._core import ConfigError, Error, InvalidArgument, Problem, project, run_cli, validate

__all__ = ["ConfigError", "Error", "InvalidArgument", "Problem", "project", "run_cli", "validate", "from_dict"]


def from_dict(config):
    """Problem from a configuration dict."""
    return Problem(_json.dumps(config))
