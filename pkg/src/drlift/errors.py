"""Exception types shared across the package.

The CLI maps these onto exit codes: InstanceFormatError -> 2,
PreconditionError -> 3, SizeGuardError -> 4.
"""


class PreconditionError(ValueError):
    """An operation was called with inputs that violate its contract."""


class SizeGuardError(RuntimeError):
    """An exhaustive operation was asked to run beyond its size guard."""


class DecompositionError(PreconditionError):
    """No valid decomposition exists for the requested parameters."""


class InstanceFormatError(ValueError):
    """An instance document failed to parse against the schema."""
