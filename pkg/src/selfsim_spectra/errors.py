"""Exception hierarchy.

Errors fall in three families, which the command line maps to exit codes:
invalid input (1), computation failure (2) and verification mismatch (3).
"""


class SpectraError(Exception):
    """Base class for every error raised by the package."""


# -- invalid input -----------------------------------------------------------

class InvalidParameters(SpectraError, ValueError):
    """Similarity data violates one or more invariants.

    ``violations`` holds the names of the broken rules, drawn from
    ``NonPositiveLength``, ``LengthsDoNotSumToOne``, ``IndexOutOfRange``,
    ``ContractionViolated`` and ``ShapeMismatch``.
    """

    def __init__(self, violations, details=None):
        self.violations = list(violations)
        self.details = list(details or [])
        msg = ", ".join(self.violations)
        if self.details:
            msg += ": " + "; ".join(self.details)
        super().__init__(msg)


class ConfigError(SpectraError, ValueError):
    """Malformed or incomplete configuration file."""


# -- computation failures ----------------------------------------------------

class ComputationError(SpectraError):
    pass


class NonConvergentEvaluation(ComputationError):
    pass


class DegenerateGap(ComputationError):
    pass


class BranchEmpty(ComputationError):
    pass


class TooFewEigenvalues(ComputationError):
    pass


class NoConvergence(ComputationError):
    pass


class NotStabilized(ComputationError):
    pass


class SingularC(ComputationError):
    def __init__(self, lam, msg=None):
        self.lam = lam
        super().__init__(msg or f"C(lambda) is singular at lambda={lam!r}")


class SingularBlock(ComputationError):
    def __init__(self, lam, msg=None):
        self.lam = lam
        super().__init__(msg or f"block C(lambda) is singular at lambda={lam!r}")


class PeriodDegenerate(ComputationError):
    pass


class BranchAbsent(ComputationError):
    pass


# -- verification mismatches -------------------------------------------------

class VerificationError(SpectraError):
    pass


class MismatchBeyondTolerance(VerificationError):
    pass
