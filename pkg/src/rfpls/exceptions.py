"""Exception hierarchy shared by all modules."""


class RfplsError(Exception):
    """Base class for errors raised by rfpls."""


class InvalidArgumentError(RfplsError, ValueError):
    """An argument violates a documented precondition."""


class DomainError(RfplsError, ValueError):
    """Evaluation points fall outside a basis domain."""


class NumericalError(RfplsError, ArithmeticError):
    """A numerical routine failed (singular system, non-PD matrix, ...)."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class RankError(NumericalError):
    """Requested more components or basis functions than the data support."""

    def __init__(self, message, max_rank=None):
        super().__init__(message)
        self.max_rank = max_rank


class ParseError(InvalidArgumentError):
    """A data file could not be parsed; ``path`` and ``line`` locate the problem."""

    def __init__(self, message, path=None, line=None):
        where = f"{path}:{line}: " if path is not None and line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)
        self.path = path
        self.line = line
