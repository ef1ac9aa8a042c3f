"""Exception hierarchy for the exporter.

Exceptions carry the CLI exit code, mirroring the convention of the bundle
consumer so scripts driving both tools see one error model.
"""

from __future__ import annotations


class ExportError(Exception):
    """Malformed request, unreadable dataset, or unusable census answer."""

    exit_code = 2


class UnknownManifoldError(ExportError):
    """The backend has no manifold under the requested name."""


class BackendUnavailableError(ExportError):
    """No census backend can be constructed in this environment."""


class FillingError(ExportError):
    """One requested filling cannot be answered.

    Non-geometric solution, or not present in a recorded dataset.  Export
    catches these per entry and records the message instead of core data.
    """
