"""Shared exception types."""


class WorkbenchError(Exception):
    """Base class for all arithmetic / structural errors raised by this package."""


class FieldMismatch(WorkbenchError):
    """Two scalars from incompatible coefficient fields met in one operation."""


class InsufficientCutoff(WorkbenchError):
    """The requested result is not determined by terms below the cutoff."""


class NotRepresentable(WorkbenchError):
    """A value exists but does not live in the configured coefficient field."""


class StructureError(WorkbenchError):
    """Input data violates a structural precondition (grading, composability, ...)."""


class NotStabilized(WorkbenchError):
    """A truncated computation still changes when the window is enlarged."""


class FixtureError(WorkbenchError):
    """A fixture file is malformed or fails validation."""
