"""Exception types shared across the package.

The CLI maps these onto exit codes: DataError -> 2, NumericalError -> 3.
"""


class DataError(ValueError):
    """Invalid or malformed input data (bad shapes, non-finite values, schema violations)."""


class NumericalError(RuntimeError):
    """A computation failed for numerical reasons (degenerate designs, excessive skips)."""
