class QweError(Exception):
    """Base class for solver errors."""


class ParseError(QweError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class NotQuadraticError(QweError, ValueError):
    """Raised when a variable occurs more than twice in an equation."""


class BudgetExceeded(QweError):
    """A node budget, monoid cap, cycle cap or skeleton limit was hit."""

    def __init__(self, what, limit, partial=None):
        self.what = what
        self.limit = limit
        self.partial = partial
        super().__init__(f"{what} exceeded limit {limit}")


class Indeterminate(QweError):
    """A decision could not be reached within the configured limits."""


class WitnessBoundExhausted(Indeterminate):
    """No existential witness was found below the witness bound."""


class ModelCheckError(QweError):
    """A supplied model does not satisfy the problem."""
