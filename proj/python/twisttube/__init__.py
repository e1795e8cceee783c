"""Lieb-Thirring bounds for twisted-tube Dirichlet Laplacians."""

import json

from ._twisttube import (
    ConfigError,
    InvalidC,
    InvalidSpec,
    SigmaOutOfRange,
    TwistTubeError,
    alpha_sq,
    gamma_beta0,
    loglog_slope,
    lt_constant,
    mu,
    trace_neg_power,
)
from . import _twisttube

__all__ = [
    "ConfigError",
    "InvalidC",
    "InvalidSpec",
    "SigmaOutOfRange",
    "TwistTubeError",
    "alpha_sq",
    "bound",
    "cross_section",
    "direct",
    "gamma_beta0",
    "loglog_slope",
    "lt_constant",
    "mu",
    "run",
    "trace_neg_power",
]


def _text(config):
    # JSON is valid YAML, so dicts go through json.dumps
    if isinstance(config, str):
        return config
    return json.dumps(config)


def cross_section(config):
    """Ground state (energy, f, coordinates, d) for a config dict or YAML text."""
    return _twisttube.cross_section(_text(config))


def bound(config):
    """Bound report as a dict."""
    return json.loads(_twisttube.bound_json(_text(config)))


def direct(config):
    """Direct 3D spectrum as a dict."""
    return json.loads(_twisttube.direct_json(_text(config)))


def run(command, config, out_dir=""):
    """Runs a command-line command; returns (exit code, stdout, stderr)."""
    return _twisttube.run(command, _text(config), out_dir)
