"""Exception types shared across the package."""


class AimpartError(Exception):
    """Base class for all package-specific failures."""


class ValidationError(AimpartError):
    """Invalid user input. Carries every problem found, not just the first."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ConvergenceError(AimpartError):
    """An iterative procedure hit its iteration cap."""


class NumericalError(AimpartError):
    """A computed quantity violates a structural guarantee (solver or quadrature bug)."""


class EntropyIncreaseError(NumericalError):
    """The relative-entropy trace increased beyond slack where it must not."""
