"""Exception hierarchy shared by all awareness modules."""


class AwarenessError(Exception):
    """Base class for every error raised by this package."""


class SituationError(AwarenessError, ValueError):
    """Invalid (directional, lateral) maneuver combination."""


class ContractError(AwarenessError):
    """An operation was called outside its precondition."""


class ConfigurationError(AwarenessError, ValueError):
    """Malformed module descriptors, relations or quadrant layouts."""


class InfeasibleError(AwarenessError):
    """No candidate satisfies the attention map.

    ``regions`` lists the requirement regions that cannot be satisfied.
    """

    def __init__(self, regions, message=None):
        self.regions = tuple(regions)
        names = ", ".join(str(r) for r in self.regions)
        super().__init__(message or f"no module combination satisfies regions: {names}")


class ConsistencyError(AwarenessError):
    """Solver output and attention-map application disagree."""


class TimelineError(AwarenessError, ValueError):
    """A maneuver timeline could not be parsed or is empty.

    ``line`` is the 1-based source line of the offending record, if known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SampleError(AwarenessError, ValueError):
    """Malformed power sample data."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
