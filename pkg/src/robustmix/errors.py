"""Shared exception types.

The CLI maps these onto exit codes: parse / validation problems exit
with 2, infeasibility with 3, exhausted budgets with 4.
"""


class RobustmixError(Exception):
    """Base class for all package errors."""


class ParseError(RobustmixError):
    """Malformed input file (graph, scenario CSV, mixture JSON, LP)."""


class InfeasibleError(RobustmixError):
    """The feasible set is empty under the given restrictions."""


class UnsupportedError(RobustmixError):
    """Operation not defined for this set type or parameter combination."""


class CapExceededError(RobustmixError):
    """An enumeration or evaluation budget was exceeded."""
