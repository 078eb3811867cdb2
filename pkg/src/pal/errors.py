"""Exception hierarchy shared by the whole interpreter."""


class PalError(Exception):
    """Base class for all interpreter errors."""


class PalSyntaxError(PalError):
    """Lexical or grammatical error, with a 1-based source position."""

    def __init__(self, message, line, column, expected=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.expected = frozenset(expected) if expected else frozenset()

    def __str__(self):
        return f"{self.message} (line {self.line}, column {self.column})"


class IncompleteInputError(PalSyntaxError):
    """Input ended inside an unfinished construct.

    Reported distinctly from plain syntax errors so an interactive loop
    can keep reading instead of giving up.
    """


class PalSemanticError(PalError):
    """Signature, initially or option level error (well-formed but wrong)."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self):
        if self.line is not None:
            return f"{self.message} (line {self.line}, column {self.column})"
        return self.message


class PalRuntimeError(PalError):
    """A transition or query failed while executing."""

    def __init__(self, message, situation=None):
        super().__init__(message)
        self.message = message
        self.situation = situation


class PalConfigError(PalError):
    """Bad engine/backend configuration."""


class PalTimeout(PalError):
    """Cooperative execution deadline exceeded."""
