"""Shared exception types."""


class ValidationError(ValueError):
    """Bad input data or parameters (CLI exit code 2)."""


class SizeGuardError(RuntimeError):
    """Instance too large for an exact method (CLI exit code 3)."""
