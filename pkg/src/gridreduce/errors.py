"""Exception types shared across the package."""


class GridReduceError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(GridReduceError):
    """A network violates a structural or electrical requirement."""


class DegenerateNetworkError(GridReduceError):
    """A reduction stage would collapse the network below its minimum size."""


class UnsupportedConfigurationError(GridReduceError):
    """A closed-form elimination was requested for a node it does not cover."""


class NumericalError(GridReduceError):
    """A matrix operation failed or exceeded its residual tolerance."""


class IndexMismatchError(GridReduceError):
    """A vector or ordering does not line up with a Laplacian index."""


class LedgerError(GridReduceError):
    """Base class for reduction-ledger problems."""


class TargetNotFoundError(LedgerError):
    """An expansion target names a field or member that does not exist."""


class DependencyError(LedgerError):
    """An expansion needs other nodes restored first.

    ``prerequisites`` lists ``"field"`` or ``"field:member"`` strings that
    would restore the missing nodes.
    """

    def __init__(self, message: str, prerequisites: list[str]):
        super().__init__(message)
        self.prerequisites = prerequisites


class LedgerIntegrityError(LedgerError):
    """The ledger contradicts the network it is supposed to describe."""


class ParseError(GridReduceError):
    """An input file could not be parsed.

    ``location`` carries "file:line" or "line:column" context when known.
    """

    def __init__(self, message: str, location: str | None = None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.location = location


class SpecError(GridReduceError):
    """A synthetic-network spec is inconsistent or unsatisfiable."""
