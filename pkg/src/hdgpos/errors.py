"""Exception hierarchy shared by all modules."""


class HDGError(Exception):
    """Base class for errors raised by hdgpos."""


class InputError(HDGError, ValueError):
    """Malformed user input: bad mesh, bad config, bad parameters."""


class ShapeError(InputError):
    """An operation was applied to a cell shape it does not support."""


class MisuseError(HDGError, ValueError):
    """A routine was called outside its contract (e.g. wrong space combination)."""


class IllPosedComboError(HDGError):
    """The local HDG problem on a hyperedge is singular."""

    def __init__(self, message, edge_id=None, condition=None):
        super().__init__(message)
        self.edge_id = edge_id
        self.condition = condition


class SolverError(HDGError):
    """The global linear solve failed (singular matrix or no convergence)."""


class BracketError(HDGError):
    """Bisection was requested on an interval without a sign change."""
