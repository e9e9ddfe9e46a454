"""Exception hierarchy.

Every error carries an ``exit_code`` that the command-line front end uses
directly (2 validation, 3 numerical failure, 4 I/O).
"""


class KemenyError(Exception):
    exit_code = 1


class ValidationError(KemenyError, ValueError):
    exit_code = 2


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ParameterError(ValidationError):
    pass


class DisconnectedGraphError(ValidationError):
    def __init__(self, message, n_components=None):
        self.n_components = n_components
        super().__init__(message)


class CutEdgeError(ValidationError):
    """The edge is a bridge, so removing it disconnects its component."""

    def __init__(self, edge, reason="edge is a cut-edge"):
        self.edge = edge
        super().__init__(f"{reason}: {edge}")


class NumericalError(KemenyError, ArithmeticError):
    exit_code = 3


class FactorizationError(NumericalError):
    def __init__(self, message, column=None):
        self.column = column
        super().__init__(message)


class InputOutputError(KemenyError, OSError):
    exit_code = 4
