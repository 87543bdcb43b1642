"""Structured error types shared across the package."""


class MobiVSRError(Exception):
    """Base class for all structured errors raised by this package."""


class DimensionMismatch(MobiVSRError, ValueError):
    """A tensor extent is incompatible with an operation; names the axis."""

    def __init__(self, axis, expected, got, context=""):
        self.axis = axis
        self.expected = expected
        self.got = got
        prefix = f"{context}: " if context else ""
        super().__init__(f"{prefix}axis {axis!r}: expected {expected}, got {got}")


class MissingDimension(MobiVSRError, ValueError):
    """A layer description lacks an extent required by its kind."""

    def __init__(self, kind, field):
        self.kind = kind
        self.field = field
        super().__init__(f"layer kind {kind!r} requires field {field!r}")


class GraphValidationError(MobiVSRError, ValueError):
    """A layer graph is structurally invalid or shape inference failed."""

    def __init__(self, message, node_id=None, edge=None):
        self.node_id = node_id
        self.edge = edge
        super().__init__(message)


class SchemaError(MobiVSRError, ValueError):
    """A serialized artifact violates its file schema."""

    def __init__(self, message, position=None, node_id=None):
        self.position = position
        self.node_id = node_id
        super().__init__(message)


class PayloadBoundsError(SchemaError):
    """A weights payload offset or length falls outside the file."""


class ValidationError(MobiVSRError, ValueError):
    """Runtime input (clip frames, weight bundles) failed validation."""
