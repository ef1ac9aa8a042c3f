"""Exception hierarchy shared across the package.

Each exception class carries the process exit code the CLI maps it to, so
library call sites never need to know about the CLI and the CLI never needs
to pattern-match on messages.
"""

from __future__ import annotations


class LamcertError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InputError(LamcertError):
    """Malformed or inconsistent input data (bad slope, bad file, bad field)."""

    exit_code = 2


class HypothesisError(LamcertError):
    """A theorem hypothesis is not met, so the requested quantity is undefined.

    Distinct from InputError: the input is well formed, it just lies outside
    the regime where the certified statement applies.
    """

    exit_code = 3


class PropertyViolation(LamcertError):
    """An inequality the implementation guarantees was observed to fail.

    Raising this is always a bug report about the artifact itself, never a
    statement about the user's data.
    """

    exit_code = 4


class NonPrimitiveSlopeError(InputError):
    """A derived slope is a proper multiple of a primitive class.

    Carries the offending gcd so family generation can report and skip.
    """

    def __init__(self, message: str, gcd: int):
        super().__init__(message)
        self.gcd = gcd
