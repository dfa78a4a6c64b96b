"""Exception hierarchy shared by all modules."""


class SaprLabError(Exception):
    """Base class for all errors raised by saprlab."""


class ParameterError(SaprLabError, ValueError):
    """Invalid parameter values or ordering."""


class ParseError(SaprLabError, ValueError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class EmptyGraphError(SaprLabError, ValueError):
    pass


class UnreachableNodeError(SaprLabError, RuntimeError):
    """The graph is disconnected so some destination cannot be reached."""


class ConsistencyError(SaprLabError, RuntimeError):
    """Internal bookkeeping went wrong (broken antecedent chain, negative count...)."""


class IncompletePathSetError(SaprLabError, ValueError):
    pass


class RoutingIntegrityError(SaprLabError, RuntimeError):
    """A packet could not be moved because the forwarding plan lacks a hop."""


class RangeExhaustedError(SaprLabError, RuntimeError):
    """No congestion crossing inside the scanned rate range."""

    def __init__(self, message, curve=None):
        super().__init__(message)
        self.curve = list(curve or [])
