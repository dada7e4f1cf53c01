"""Exception hierarchy shared by every quatsub module."""


class QuatsubError(Exception):
    """Base class for all errors raised by quatsub."""


class ParseError(QuatsubError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class DomainError(QuatsubError):
    """An expression was evaluated outside the region where it is defined."""


class NotPositiveDefiniteError(QuatsubError):
    def __init__(self, smallest_eigenvalue: float, point=None):
        self.smallest_eigenvalue = float(smallest_eigenvalue)
        self.point = point
        where = "" if point is None else f" at {list(map(float, point))}"
        super().__init__(
            f"metric is not positive-definite{where}: "
            f"smallest eigenvalue {self.smallest_eigenvalue:.3e}"
        )


class NotASubmersionError(QuatsubError):
    """The differential of the map has numerical rank below the codomain dimension."""


class StructureError(QuatsubError):
    """Invalid or dimensionally inconsistent quaternionic structure."""


class NotVerticalError(QuatsubError):
    pass


class InconsistencyError(QuatsubError):
    """A result contradicts a proven statement; indicates a bug or a corrupt input."""


class ManifestError(QuatsubError):
    pass
