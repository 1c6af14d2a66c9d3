"""Exception types raised across the package.

Every error carries a stable ``code`` string so that command-line failures can
be reported in a machine-readable form.
"""


class AlphaPRKError(Exception):
    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class ParameterOutOfDomain(AlphaPRKError, ValueError):
    code = "parameter-out-of-domain"


class DegenerateWeights(AlphaPRKError, ValueError):
    code = "degenerate-weights"


class TableauNotConstraintPreserving(AlphaPRKError, ValueError):
    code = "tableau-not-constraint-preserving"


class InconsistentState(AlphaPRKError, ValueError):
    code = "inconsistent-state"


class InvalidStepSize(AlphaPRKError, ValueError):
    code = "invalid-step-size"


class NewtonDivergence(AlphaPRKError, RuntimeError):
    """Newton iteration failed to reach tolerance.

    ``best`` and ``residual`` hold the best iterate found and its residual
    norm; ``phase`` names the nonlinear system (``"stage"``,
    ``"projection"``, ...).
    """

    code = "newton-divergence"

    def __init__(self, message, best=None, residual=float("nan"), phase=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.phase = phase

    def to_dict(self):
        d = super().to_dict()
        d["phase"] = self.phase
        d["residual"] = self.residual
        return d


class SingularJacobian(NewtonDivergence):
    code = "singular-jacobian"


class NoBracketFound(AlphaPRKError, RuntimeError):
    code = "no-bracket-found"


class StepFailure(AlphaPRKError, RuntimeError):
    """A step inside a trajectory failed; wraps the underlying error."""

    code = "step-failure"

    def __init__(self, step, cause):
        super().__init__(f"step {step} failed: {cause}")
        self.step = step
        self.cause = cause

    def to_dict(self):
        d = super().to_dict()
        d["step"] = self.step
        d["cause"] = getattr(self.cause, "code", type(self.cause).__name__)
        return d


class ConfigInvalid(AlphaPRKError, ValueError):
    code = "config-invalid"
