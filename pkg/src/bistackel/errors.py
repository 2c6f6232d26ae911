"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: input problems (``InputError``) exit
with 2, numerical trouble (``NumericalError``) with 3.
"""


class InputError(ValueError):
    """Base class for malformed user input."""


class NumericalError(ArithmeticError):
    """Base class for failures that depend on the evaluation point."""


class ExpressionSyntaxError(InputError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UnknownVariable(InputError):
    def __init__(self, name: str, allowed=()):
        self.name = name
        allowed = ", ".join(sorted(allowed))
        super().__init__(f"unknown variable {name!r} (allowed: {allowed})")


class DomainError(NumericalError):
    """Division by zero or square root of a negative number."""

    def __init__(self, message: str, subtree: str | None = None):
        self.subtree = subtree
        if subtree is not None:
            message = f"{message} in subexpression {subtree!r}"
        super().__init__(message)


class SingularMatrix(NumericalError):
    pass


class SingularJacobian(SingularMatrix):
    pass


class TurningPoint(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class ValidationError(InputError):
    pass


class BadPartition(ValidationError):
    """Block sizes that do not fit the system (wrong sum, empty block)."""


class IntegrationAborted(NumericalError):
    """Raised when a field cannot be evaluated mid-integration.

    ``trajectory`` holds the states computed so far and ``time`` the time
    of the last good state.
    """

    def __init__(self, message: str, trajectory=None, time: float | None = None):
        self.trajectory = trajectory
        self.time = time
        super().__init__(message)
