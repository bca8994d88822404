"""Leggett-Garg tests on small quantum systems.

Modules: ``qop`` (states, operators, channels), ``measure`` (measurement
models), ``lgi`` (inequalities and reports), ``dynamics`` (closed and open
evolution, counting statistics), ``macroreal`` (classical oracles),
``maxviol`` (violation maximisation), ``scenarios`` (experiment
reproductions) and ``cli``.
"""

from . import dynamics, lgi, macroreal, maxviol, measure, qop, scenarios
from .errors import (ConvergenceError, EmptyBranchError, LGKitError, SteadyStateError,
                     ValidationError)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "qop", "measure", "lgi", "dynamics", "macroreal", "maxviol", "scenarios",
    "LGKitError", "ValidationError", "EmptyBranchError", "SteadyStateError", "ConvergenceError",
    "BACKEND", "__version__",
]
