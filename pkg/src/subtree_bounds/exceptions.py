"""Custom exceptions for subtree-bounds.

Every class carries the process exit code the CLI uses for it.
"""

from enum import Enum


class SubtreeBoundsError(Exception):
    """Base class for all library errors."""
    exit_code = 1


class ModelParseError(SubtreeBoundsError):
    """Raised when a model document cannot be read or is malformed."""
    exit_code = 3


class InvalidModelError(SubtreeBoundsError):
    """Raised when a model violates an invariant (negative entry, bad scope...)."""
    exit_code = 4


class StructuralError(InvalidModelError):
    """Raised on count or shape mismatches between related objects."""
    exit_code = 4


class CapacityError(SubtreeBoundsError):
    """Raised when a state-space or enumeration cap would be exceeded."""
    exit_code = 5


class VerificationError(SubtreeBoundsError):
    """Raised by the CLI when the verification suite reports violations."""
    exit_code = 6


class DegenerateModelError(SubtreeBoundsError):
    """Raised when every assignment (or every message entry) has zero mass."""
    exit_code = 7


class ContractError(SubtreeBoundsError):
    """Raised when an operation is called outside its preconditions."""
    exit_code = 8


class RejectReason(str, Enum):
    """Why a vertex/edge restriction is not a sub-junction-tree."""
    CYCLE = "cycle"
    DISCONNECTED = "disconnected"
    JUNCTION_BROKEN = "junction_broken"


class SubtreeRejected(ContractError):
    """Raised when a restriction of a junction graph is not a junction tree."""

    def __init__(self, reason: RejectReason, detail: str = ""):
        self.reason = reason
        self.detail = detail
        message = f"sub-tree rejected ({reason.value})"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class ConsistencyError(SubtreeBoundsError):
    """Raised when two independent computations of the same value disagree."""
    exit_code = 1
