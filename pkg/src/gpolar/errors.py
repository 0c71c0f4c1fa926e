"""Exception hierarchy shared by all gpolar modules."""


class GPDError(Exception):
    """Base class for every error raised by gpolar.

    ``step`` is set when the error surfaced inside an iteration, so callers
    can tell which ΣDWH or Newton step failed.
    """

    def __init__(self, message: str, *, step: int | None = None):
        super().__init__(message)
        self.step = step

    def at_step(self, step: int) -> "GPDError":
        self.step = step
        if self.args:
            self.args = (f"step {step}: {self.args[0]}",) + self.args[1:]
        return self


class DimensionError(GPDError, ValueError):
    pass


class DomainError(GPDError, ValueError):
    pass


class StructureError(GPDError, ValueError):
    """Input lacks a required structure (pseudosymmetry, Lagrangian, ...)."""


class SingularityError(GPDError, ArithmeticError):
    pass


class HyperbolicBreakdownError(SingularityError):
    """|a| and |b| are too close for a hyperbolic Givens rotation."""

    def __init__(self, message: str, *, column: int | None = None, step: int | None = None):
        super().__init__(message, step=step)
        self.column = column


class NoExchangeError(SingularityError):
    """Exchange pivot of a graph basis below the pivot floor."""


class NonTerminationError(GPDError, RuntimeError):
    """Graph-basis heuristic exhausted its swap budget."""


class ConvergenceError(GPDError, RuntimeError):
    """Iteration reached ``max_iter``; the partial result is attached."""

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class RankError(GPDError, ValueError):
    pass


class IllPosedError(GPDError, ValueError):
    """Matrix function undefined, e.g. eigenvalue on the imaginary axis."""


class ParseError(GPDError, ValueError):
    """Malformed matrix or signature file; ``line`` is 1-based."""

    def __init__(self, message: str, *, line: int | None = None, path: str | None = None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line
        self.path = path
