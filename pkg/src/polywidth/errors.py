"""Exception types shared across the package.

Plain ``ValueError`` is used for argument/range violations; the classes here
mark conditions callers are expected to branch on (and that the CLI maps to
distinct exit codes).
"""


class UnsupportedVariantError(TypeError):
    """The operation has no implementation for this body variant."""


class UnboundedBodyError(ValueError):
    """The constraint matrix does not define a bounded body (rank(A) < n)."""


class ResourceGuardError(RuntimeError):
    """A combinatorial guard was exceeded (e.g. vertex enumeration dimension)."""

    def __init__(self, guard: str, message: str):
        super().__init__(message)
        self.guard = guard
