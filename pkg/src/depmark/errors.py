"""Exception hierarchy.

Everything raised for bad input derives from :class:`ValidationError`, which
the CLI maps to exit status 2.
"""


class DepmarkError(Exception):
    pass


class ValidationError(DepmarkError, ValueError):
    pass


class MassError(ValidationError):
    """Masses or weights do not sum to one."""


class GeometryError(ValidationError):
    """Malformed interval, duplicate atom, or missing conditional law."""


class DimensionError(ValidationError):
    pass


class SupportError(ValidationError):
    """A predictor value outside the support of the marginal."""


class DomainError(ValidationError):
    pass


class CountError(ValidationError):
    pass


class StateError(ValidationError):
    """Operation applied to data in the wrong state (e.g. transformed twice)."""


class DegenerateError(ValidationError):
    """A measure is undefined because a variable is almost surely constant."""


class UnknownExample(ValidationError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class IoError(DepmarkError, OSError):
    pass
