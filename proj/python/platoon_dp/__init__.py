# Copyright 2026 The platoon-dp Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Coordinated platooning at a highway junction.

Thin wrappers over the native core. Configs are plain dicts with the same keys
as the command line tool's JSON config; results come back as dicts (JSON
outputs) or CSV text (tables).
"""

import json as _json

from . import _core
from ._core import ConfigError, DomainError, NumericalError, RateEstimator

__version__ = _core.__version__

__all__ = [
    "ConfigError",
    "DomainError",
    "NumericalError",
    "RateEstimator",
    "bench",
    "closed_form_value",
    "compare",
    "config_hash",
    "constants",
    "poisson_residuals",
    "reward_cruise",
    "reward_merge",
    "simulate",
    "solve",
    "sweep",
]


def _dump(config):
    return _json.dumps(config or {})


def constants(params=None):
    """t0, c_n, g0, theta_n and theta_n_prime for the cost parameters."""
    return _core.constants(_dump(params))


def reward_merge(s, params=None):
    return _core.reward_merge(s, _dump(params))


def reward_cruise(a, params=None):
    return _core.reward_cruise(a, _dump(params))


def poisson_residuals(theta, c, lam, params=None):
    return _core.poisson_residuals(theta, c, lam, _dump(params))


def closed_form_value(s, lam, params=None):
    """Optimal value at s under exponential arrivals with rate lam."""
    return _core.closed_form_value(s, lam, _dump(params))


def solve(solver="poisson", arrivals="exponential:0.02", **config):
    """Threshold policy from one solver; returns the result dict."""
    config.update(solver=solver, arrivals=arrivals)
    return _json.loads(_core.solve(_dump(config)))


def simulate(policy="rts", vehicles=False, **config):
    """Simulation summary dict, plus the per-vehicle CSV when vehicles=True."""
    config["policy"] = policy
    summary, csv = _core.simulate(_dump(config), vehicles)
    summary = _json.loads(summary)
    return (summary, csv) if vehicles else summary


def compare(**config):
    return _core.compare(_dump(config))


def sweep(parameter, values, **config):
    config.update(parameter=parameter, values=list(values))
    return _core.sweep(_dump(config))


def bench(**config):
    return _core.bench(_dump(config))


def config_hash(**config):
    return _core.config_hash(_dump(config))
