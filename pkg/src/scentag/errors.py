"""Exception types shared across the package.

Every user-input failure carries an optional source location so the CLI
and the service can point at the offending line.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceLoc:
    line: int  # 1-based
    col: int  # 1-based

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class ScentagError(Exception):
    """Base class for all errors raised by this package."""

    kind = "usage"

    def __init__(self, message: str, loc: SourceLoc | None = None):
        self.message = message
        self.loc = loc
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.loc is not None:
            return f"{self.loc}: {self.message}"
        return self.message


class ParseError(ScentagError):
    """Malformed document text (registry, category, scenario, or query)."""


class ValidationError(ScentagError):
    """Structurally well-formed input that violates an invariant."""


class ResolutionError(ScentagError):
    """A tag path that does not resolve in the active registry."""


class BoundsTooLargeError(ScentagError):
    """Bounded-universe enumeration would exceed the size guard."""


class StoreError(ScentagError):
    """Scenario-store I/O failure (missing file, bad header, lock)."""

    kind = "io"
