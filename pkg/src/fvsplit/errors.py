"""Exception types shared across the solver."""


class NonPhysicalState(ValueError):
    """A state has non-positive density or pressure (below the validity floor)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DegenerateEigensystem(ValueError):
    """The characteristic decomposition is unavailable (sound speed <= 0)."""


class StepRejected(RuntimeError):
    """A time step produced an invalid interior cell.

    Carries enough context to report where and when the solve failed.
    """

    def __init__(self, message, step=None, time=None, cell=None):
        super().__init__(message)
        self.step = step
        self.time = time
        self.cell = cell

    def __str__(self):
        base = super().__str__()
        return f"{base} (step={self.step}, t={self.time}, cell={self.cell})"


class ConfigError(ValueError):
    """A run configuration file or flag set could not be parsed/validated."""
