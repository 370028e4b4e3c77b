"""Exception taxonomy shared by the services, the HTTP routes and the CLI."""


class TreePackError(Exception):
    """Base class; carries the HTTP status and CLI exit code for the failure."""

    status_code = 500
    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class DomainError(TreePackError, ValueError):
    """Input violates an operation's precondition."""

    status_code = 422
    exit_code = 1


class DimensionError(DomainError):
    """Sequences or trees of different vertex counts were combined."""


class StructureError(DomainError):
    """Input is structurally malformed (for example an edge set that is not a tree)."""


class InfeasibleError(TreePackError):
    """Valid input with provably no solution."""

    status_code = 409
    exit_code = 2


class ResourceGuardError(TreePackError):
    """An exhaustive search would exceed its configured size guard."""

    status_code = 413
    exit_code = 3


class InvariantError(TreePackError):
    """A constructed object failed its own postcondition check."""

    status_code = 500
    exit_code = 1
