"""Exception types shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, DataError exits 2,
NumericalError exits 3.
"""


class ToxkgError(Exception):
    """Base class for package errors."""


class DataError(ToxkgError):
    """Malformed or inconsistent input data (parse failures, bad references,
    impossible requests such as a split with too few groups)."""


class NumericalError(ToxkgError):
    """Numerical failure: divergence, non-finite loss, degenerate metric."""
