"""
Error types for rlmove.

Every error carries the exit code the command line front end reports for it,
so `app.main` can map any library failure to a status without a lookup table.
"""

from __future__ import annotations

from typing import Optional

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_VERIFY = 3
EXIT_INTERNAL = 4


class RlmoveError(Exception):
    """Base class for all rlmove errors."""

    exit_code = EXIT_INTERNAL


class ParameterError(RlmoveError, ValueError):
    """A parameter such as alpha is outside its accepted range."""

    exit_code = EXIT_USAGE


class IntervalValidationError(RlmoveError, ValueError):
    """An explicit permutation or interval map is not a valid bijection."""

    exit_code = EXIT_FORMAT


class FormatError(RlmoveError, ValueError):
    """
    A serialized stream is malformed.

    Args:
        message (str): What is wrong
        offset (int, optional): Byte offset of the problem in binary input
        line (int, optional): 1-based line number of the problem in text input
    """

    exit_code = EXIT_FORMAT

    def __init__(self, message: str, offset: Optional[int] = None, line: Optional[int] = None):
        self.message = message
        self.offset = offset
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        elif offset is not None:
            message = f"{message} (offset {offset})"
        super().__init__(message)


class MoveFormatError(FormatError):
    """Malformed MVST0001 stream."""


class RlbwtFormatError(FormatError):
    """Malformed RLBWT text or binary input."""


class LcpFormatError(FormatError):
    """Malformed LCPA0001 stream."""


class InputMismatchError(RlmoveError, ValueError):
    """Two inputs that must describe the same text disagree."""

    exit_code = EXIT_FORMAT


class PositionRangeError(RlmoveError, IndexError):
    """A position is outside [0, n)."""

    exit_code = EXIT_FORMAT


class QueryContractError(RlmoveError, IndexError):
    """A checked move query received a position outside the given interval."""


class SinkError(RlmoveError, RuntimeError):
    """The LCP consumer failed; `position` is the first value it did not accept."""

    exit_code = EXIT_FORMAT

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at LCP position {position}")


class BalanceStateError(RlmoveError, RuntimeError):
    """A balanced pair was used before balancing finished."""


class ArenaCapacityError(RlmoveError, RuntimeError):
    """The node arena ran out of slots."""


class BalanceInvariantError(RlmoveError, AssertionError):
    """A debug-mode balancing invariant check failed."""


class VerificationError(RlmoveError, ValueError):
    """A stored structure failed verification."""

    exit_code = EXIT_VERIFY
