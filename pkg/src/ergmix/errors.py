"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A computation failed for numerical reasons (singular covariance,
    non-finite intermediate, ...) rather than because the inputs were
    malformed."""
