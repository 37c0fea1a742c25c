"""Exceptions shared across pipeline stages."""


class DataError(Exception):
    """Malformed or inconsistent input: bad manifest, ragged CSV, shape mismatch."""


class NumericalError(Exception):
    """Numerical failure: diverging training loss, non-positive-definite covariance."""
