"""Exception hierarchy used throughout :mod:`dsc`."""


class DSCError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(DSCError):
    """A process model failed to produce a usable constraint vector."""


class NonFiniteConstraintError(ModelError):
    """The model returned NaN or an infinite constraint value."""

    def __init__(self, d=None, theta=None, g=None):
        self.d = None if d is None else tuple(float(x) for x in d)
        self.theta = None if theta is None else tuple(float(x) for x in theta)
        self.g = None if g is None else tuple(float(x) for x in g)
        msg = "model returned non-finite constraint value"
        if self.d is not None:
            msg += f" at d={list(self.d)}, theta={list(self.theta or ())}"
        if self.g is not None:
            msg += f" (g={list(self.g)})"
        super().__init__(msg)


class EllipsoidSamplingError(DSCError):
    """Rejection sampling from an ellipsoid clipped by the knowledge space failed."""


class ConfigError(DSCError):
    """Invalid run configuration. ``field`` names the offending key path."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"{field}: "
        super().__init__(prefix + message)


class TrainingDivergedError(DSCError):
    """Surrogate training produced a non-finite loss."""
