"""Exception hierarchy shared across the toolkit.

The CLI maps each class to a distinct exit code, so solver and parser
failures stay distinguishable in scripted benchmark runs.
"""


class GridTreeError(Exception):
    """Base class for all toolkit errors."""


class CaseParseError(GridTreeError):
    """Malformed case file. Carries the 1-based line number when known."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class NetworkValidationError(GridTreeError):
    """Structural invariant violated (disconnected net, duplicate ids, ...)."""


class InfeasibleError(GridTreeError):
    """No feasible tree partition exists under the given constraints."""


class BudgetError(GridTreeError):
    """Enumeration / search budget exhausted before completion."""


class ModelBuildError(GridTreeError):
    """Conflicting or inconsistent fixings while building the integer model."""


class BridgeError(GridTreeError):
    """External solver bridge failure (bad exit, timeout, unusable output)."""


class SolverTimeout(BridgeError):
    """External solver exceeded its wall-clock budget."""


class UnsupportedOperation(GridTreeError):
    """Operation requires an external solver bridge that is not configured."""
