"""Shared exception types."""


class NumericalFailure(RuntimeError):
    """A quadrature or iteration did not reach its accuracy target.

    Carries the best value computed so far (``estimate``) and the achieved
    error bound (``error``) so callers can decide whether to degrade
    gracefully or abort.
    """

    def __init__(self, message: str, estimate: float | None = None,
                 error: float | None = None) -> None:
        super().__init__(message)
        self.estimate = estimate
        self.error = error
