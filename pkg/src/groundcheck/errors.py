"""Exception hierarchy shared across the package."""

from __future__ import annotations


class GroundcheckError(Exception):
    """Base class for all package errors."""


class ConfigError(GroundcheckError):
    """A configuration object violates its invariants."""


class ContractError(GroundcheckError):
    """A caller violated an operation's precondition."""


class ClaimOverflowError(GroundcheckError):
    """A claim is too long to fit the scoring window alongside any evidence."""

    def __init__(self, message: str, claim_tokens: int = 0, window: int = 0):
        super().__init__(message)
        self.claim_tokens = claim_tokens
        self.window = window


class BackendError(GroundcheckError):
    """A model backend call failed."""


class BackendUnavailableError(BackendError):
    """A remote backend stayed unreachable after all retries."""


class ProtocolError(BackendError):
    """A remote backend returned a malformed or inconsistent response."""


class DatasetError(GroundcheckError):
    """A benchmark dataset file could not be parsed."""
