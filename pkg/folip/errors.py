"""
Errors module.
Exception hierarchy shared by the grounding, parsing, LP and solver layers.
"""

from dataclasses import dataclass


class FolipError(Exception):
    """Base class for every error raised by the package."""


class TermError(FolipError):
    """Raised on grounding-time faults (non-ground atoms, unbound variables, arithmetic)."""


class GuardError(FolipError):
    """Raised when a context predicate is called with insufficient instantiation."""


class CostError(FolipError):
    """Raised when a cost rule yields a negative value."""


class LpError(FolipError):
    """Raised on LP construction errors and numerical failures."""


class SolverError(FolipError):
    """Raised on misuse of branch-and-bound primitives."""


class MlnError(FolipError):
    """Raised when an MLN program falls outside the supported fragment."""


@dataclass(frozen=True)
class Diagnostic:
    """A parse problem located in the source text."""

    line: int
    column: int
    message: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.message}"


class ParseError(FolipError):
    """Raised when a problem or MLN file fails to parse or validate."""

    def __init__(self, diagnostics):
        """
        Initialize the error.

        Args:
            diagnostics: list of Diagnostic objects (at least one)
        """
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))

    def messages(self):
        """Return the bare diagnostic messages, without locations."""
        return [d.message for d in self.diagnostics]
