"""Exception taxonomy, split by failure origin.

The command line maps each class to a stable exit code: bad parameters
exit 1, unusable input data exits 2, numerical breakdown exits 3.
"""


class ParameterError(ValueError):
    """A caller-supplied parameter is out of range or inconsistent."""


class DataError(ValueError):
    """Input data is malformed: bad cells, wrong shapes, unusable columns."""


class NumericalError(RuntimeError):
    """A computation lost the rank or precision it needed."""


class EstimationError(NumericalError):
    """No usable signal survived estimation (e.g. every kernel degenerate)."""
