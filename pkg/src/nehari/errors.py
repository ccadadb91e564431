"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "NehariError",
    "DomainError",
    "ConfigError",
    "BracketError",
    "ProjectionError",
    "SeedingError",
    "SolverError",
]


class NehariError(Exception):
    """Base class for package errors."""


class DomainError(NehariError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(NehariError):
    """Invalid configuration, addressed by section and key."""

    def __init__(self, section: str, key: str, message: str):
        self.section = section
        self.key = key
        self.message = message
        super().__init__(f"[{section}] {key}: {message}")


class BracketError(NehariError):
    """A root bracket could not be established within the growth cap."""


class ProjectionError(NehariError):
    """The requested Nehari branch is not reachable along this ray."""

    def __init__(self, message: str, diagnosis=None):
        super().__init__(message)
        self.diagnosis = diagnosis


class SeedingError(NehariError):
    """No admissible seed field found after narrowing."""

    def __init__(self, message: str, diagnosis=None):
        super().__init__(message)
        self.diagnosis = diagnosis


class SolverError(NehariError):
    """Branch minimization failed."""

    def __init__(self, message: str, history=None):
        super().__init__(message)
        self.history = history
