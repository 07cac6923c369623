"""Exception hierarchy shared by the library and the command line front end."""


class EigenOrientError(Exception):
    """Base class for all errors raised by eigenorient."""


class ArgumentError(EigenOrientError, ValueError):
    """An argument violates a documented precondition."""


class ValidationError(ArgumentError):
    """Input data is well formed but inconsistent with the requested command."""


class NumericError(EigenOrientError, ArithmeticError):
    """A numerical procedure failed (non-convergence, degeneracy)."""


class DegenerateError(NumericError):
    """A column, direction or scale collapsed to (numerically) zero."""


class ParseError(EigenOrientError):
    """A file could not be parsed.

    ``line`` and ``column`` are 1-based; either may be None when unknown.
    """

    def __init__(self, message, path=None, line=None, column=None):
        self.path = path
        self.line = line
        self.column = column
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
