"""Exception types shared across the package."""


class RobsubError(Exception):
    """Base class for library errors."""


class ParameterError(RobsubError, ValueError):
    """Invalid configuration or parameter value."""


class InputError(RobsubError, ValueError):
    """Structurally invalid input (bad node id, point outside polytope, ...)."""


class SizeCapError(RobsubError, ValueError):
    """An exact/enumerative oracle was asked to exceed its size cap."""


class BudgetError(RobsubError, RuntimeError):
    """Query budget exhausted."""


class ProtocolError(RobsubError, RuntimeError):
    """Query protocol violation (re-query, ineligible target, ...)."""
