"""Exception hierarchy for the graph bundle verifier.

Each exception carries the CLI exit code it maps to:

| Code | Meaning |
|------|---------|
| 0 | Success, all expectations met |
| 1 | Expectation mismatch / internal consistency failure |
| 2 | Input error (parameters, files, validation) |
| 3 | Resource cap exceeded |
"""

from typing import Optional, Sequence

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT_ERROR = 2
EXIT_RESOURCE_CAP = 3


class BundleToolkitError(Exception):
    """Base class for all toolkit errors."""

    exit_code = EXIT_INPUT_ERROR


class InvalidParameterError(BundleToolkitError):
    """A constructor parameter is out of its allowed range."""


class GraphValidationError(BundleToolkitError):
    """A graph violates simplicity, symmetry or a required connectivity."""


class ConnectionValidationError(BundleToolkitError):
    """A connection violates bijectivity, the automorphism rule or inverse consistency."""

    def __init__(self, message: str, edge: Optional[Sequence[int]] = None):
        if edge is not None:
            message = f"{message} (oriented edge {tuple(edge)})"
        super().__init__(message)
        self.edge = tuple(edge) if edge is not None else None


class InvalidPathError(BundleToolkitError):
    """A vertex sequence is not a walk in the given graph."""


class InvalidLoopError(InvalidPathError):
    """A walk that must be closed is not."""


class FormatError(BundleToolkitError):
    """A graph or connection file cannot be parsed."""


class ResourceLimitError(BundleToolkitError):
    """A configured cap was exceeded."""

    exit_code = EXIT_RESOURCE_CAP

    def __init__(self, cap_name: str, limit: int, actual: Optional[int] = None):
        detail = f" (got {actual})" if actual is not None else ""
        super().__init__(f"Resource cap {cap_name}={limit} exceeded{detail}")
        self.cap_name = cap_name
        self.limit = limit
        self.actual = actual


class HypothesisError(BundleToolkitError):
    """A theorem hypothesis does not hold; reported rather than fatal in pipelines."""

    exit_code = EXIT_MISMATCH

    def __init__(self, hypothesis: str, message: str, witness: Optional[Sequence[int]] = None):
        super().__init__(f"Hypothesis '{hypothesis}' failed: {message}")
        self.hypothesis = hypothesis
        self.witness = list(witness) if witness is not None else None


class NotTrivialError(BundleToolkitError):
    """A trivialization was requested for a non-trivial connection."""


class InternalConsistencyError(BundleToolkitError):
    """A postcondition scan failed; indicates a bug rather than bad input."""

    exit_code = EXIT_MISMATCH
