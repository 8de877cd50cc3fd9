"""Exception hierarchy shared across the package."""


class SazfError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(SazfError, ValueError):
    pass


class SingularGram(SazfError, ArithmeticError):
    """A Gram matrix is singular or too ill-conditioned to invert."""


class NotHermitian(SazfError, ValueError):
    pass


class NegativeEigenvalue(SazfError, ValueError):
    pass


class InvalidConfig(SazfError, ValueError):
    pass


class DegenerateChannel(SazfError, RuntimeError):
    """Too many consecutive ill-conditioned channel draws."""


class ParseError(SazfError, ValueError):
    def __init__(self, message, *, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ValidationError(InvalidConfig):
    """A parsed scenario violates a configuration invariant."""
