"""Exception types shared across the package."""


class MatchdiffError(Exception):
    """Base class for all package errors."""


class InvalidInputError(MatchdiffError, ValueError):
    """Malformed or out-of-contract arguments (shapes, ranges, non-finite data)."""


class DegenerateInputError(MatchdiffError, ValueError):
    """Inputs that are structurally valid but carry no usable signal (zero mass)."""


class SizeLimitError(MatchdiffError, ValueError):
    """Request exceeds a hard combinatorial size limit."""


class SamplerStepError(MatchdiffError, RuntimeError):
    """Denoiser failure inside the reverse-sampling loop.

    Carries the step index and timestep at which the failure happened.
    """

    def __init__(self, step_index, timestep, cause):
        super().__init__(
            f"denoiser failed at step {step_index} (t={timestep}): {cause}"
        )
        self.step_index = step_index
        self.timestep = timestep
        self.cause = cause
