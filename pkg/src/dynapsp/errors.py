"""Exception types shared across the package."""


class DynApspError(Exception):
    pass


class UnknownVertex(DynApspError, KeyError):
    pass


class UnknownEdge(DynApspError, KeyError):
    pass


class InvalidSplitSet(DynApspError, ValueError):
    pass


class Disconnected(DynApspError):
    pass


class EndpointMismatch(DynApspError, ValueError):
    pass


class MissingHostEdge(DynApspError, KeyError):
    pass


class NoIntersection(DynApspError, ValueError):
    pass


class GraphMismatch(DynApspError, ValueError):
    pass


class ApspUnavailable(DynApspError):
    pass


class RepairBudgetExceeded(DynApspError):
    pass


class EpochExceeded(DynApspError):
    pass


class NotAStar(DynApspError, ValueError):
    pass


class StaleEdge(DynApspError, KeyError):
    pass


class DegreeLoopStalled(DynApspError):
    pass


class InvalidSpec(DynApspError, ValueError):
    pass


class ConfigError(DynApspError, ValueError):
    pass


class InvariantViolation(DynApspError, AssertionError):
    """Raised by verification code; `name` identifies the broken invariant."""

    def __init__(self, name, detail=""):
        super().__init__(f"{name}: {detail}" if detail else name)
        self.name = name
        self.detail = detail
