"""Exception types shared across the toolkit."""


class ConfigError(ValueError):
    """A configuration value violates a structural requirement (bad key, CFL, grid size...)."""


class ValidationError(ValueError):
    """Runtime data fails a precondition (size mismatch, non-finite entry, bad range)."""


class KernelSingularityError(ValueError):
    """The compensation kernel denominator is (numerically) zero for the chosen gains."""


class BlowupError(RuntimeError):
    """The explicit scheme produced non-finite or runaway values."""

    def __init__(self, message, step_index=None):
        if step_index is not None:
            message = f"{message} (step {step_index})"
        super().__init__(message)
        self.step_index = step_index


class ControllerBlowupError(BlowupError):
    """A controller intermediate went non-finite; carries the component breakdown."""

    def __init__(self, message, step_index=None, components=None):
        super().__init__(message, step_index=step_index)
        self.components = dict(components or {})
