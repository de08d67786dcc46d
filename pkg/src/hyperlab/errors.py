"""Exception hierarchy shared by the whole package."""


class HyperlabError(Exception):
    """Base class for every error raised by hyperlab."""


class InvalidArgumentError(HyperlabError, ValueError):
    pass


class GridMismatchError(HyperlabError, ValueError):
    pass


class GeometryError(HyperlabError, ValueError):
    pass


class ResolutionError(HyperlabError, ValueError):
    """A requested frequency or scale is not representable on the grid."""


class NumericalFailure(HyperlabError, RuntimeError):
    """Base for failures detected while integrating (CLI exit code 3)."""


class BlowupError(NumericalFailure):
    def __init__(self, step, reason="non-finite values"):
        self.step = step
        self.reason = reason
        super().__init__(f"instability at step {step}: {reason}")


class WallContaminationError(NumericalFailure):
    def __init__(self, time, tail_fraction, tol):
        self.time = time
        self.tail_fraction = tail_fraction
        self.tol = tol
        super().__init__(
            f"wall contamination at t={time:.6g}: tail mass fraction "
            f"{tail_fraction:.3e} exceeds {tol:.1e}"
        )


class ConfigError(HyperlabError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKeyError(ConfigError):
    pass


class EmptySearchError(InvalidArgumentError):
    pass
