"""Exception taxonomy shared across the toolkit.

The CLI maps these onto exit codes: InputError -> 2, ResourceLimitError -> 3.
Property failures (a refinement that does not hold, a satisfaction check that
fails) are ordinary return values, not exceptions.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all package-specific errors."""


class InputError(ToolkitError):
    """Malformed or ill-typed input (parse errors, dimension mismatches)."""


class PreconditionError(InputError):
    """An operation's structural precondition does not hold (e.g. non-SVNF input)."""


class ResourceLimitError(ToolkitError):
    """A configured guardrail was hit (DNF branch cap, node budget, dimension cap)."""


class GridTooCoarseError(ToolkitError):
    """Implementation enumeration found a required constraint with no grid point."""
