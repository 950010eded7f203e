"""Exception hierarchy shared by all modules."""


class SsfError(Exception):
    """Base class for every error raised by ssfkit."""


class InadmissiblePotentialError(SsfError, ValueError):
    """The potential violates the short-range condition or is malformed."""


class NumericalError(SsfError, RuntimeError):
    """A numerical procedure failed to reach its target accuracy."""


class SingularIntegrationError(NumericalError):
    """Adaptive step size collapsed, typically near a singular point."""

    def __init__(self, message, location):
        super().__init__(f"{message} (at x = {location!r})")
        self.location = location


class TailTooSlowError(NumericalError):
    """No truncation radius below the cap makes the tail bound small enough."""


class SlowConvergenceError(NumericalError):
    """Box eigenvalues did not stabilise before the box-length cap."""

    def __init__(self, message, previous, last):
        super().__init__(f"{message}: previous={list(previous)}, last={list(last)}")
        self.previous = list(previous)
        self.last = list(last)


class InconclusiveError(NumericalError):
    """Levinson extrapolation is neither near an integer nor a half-integer."""


class JumpAmbiguityError(NumericalError):
    """A floor argument sits too close to an integer to resolve the step."""

    def __init__(self, message, candidates):
        super().__init__(f"{message}: candidates={candidates}")
        self.candidates = tuple(candidates)


class FloorIntegrationError(NumericalError):
    """Piecewise floor integration could not isolate the integer crossings."""
