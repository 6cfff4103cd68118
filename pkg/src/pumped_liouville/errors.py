"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`PumpedLiouvilleError`. The CLI maps the three families below onto
exit codes: configuration problems, model validation problems and numerical
failures.
"""


class PumpedLiouvilleError(Exception):
    """Base class for all package errors."""


class ConfigError(PumpedLiouvilleError):
    """Malformed or incomplete run configuration."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(PumpedLiouvilleError, ValueError):
    """A model violates one or more physical constraints."""

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("model validation failed: " + "; ".join(self.failures))


class DimensionError(PumpedLiouvilleError, ValueError):
    """Array shapes do not fit together."""


class DomainError(PumpedLiouvilleError, ValueError):
    """Argument outside the domain where a formula is defined."""


class UnboundedGrowthError(DomainError):
    """A pumped level has no exit channel, so its population grows forever."""


class UnsupportedRelaxationError(PumpedLiouvilleError, ValueError):
    """Relaxation cannot be represented by single-trajectory damping."""


class NumericalError(PumpedLiouvilleError, ArithmeticError):
    """Base class for numerical failures."""


class ConvergenceError(NumericalError):
    """An iterative method exhausted its iteration budget."""


class SingularMatrixError(NumericalError):
    """Matrix is singular to working tolerance."""

    def __init__(self, message, rank_deficiency):
        self.rank_deficiency = rank_deficiency
        super().__init__(f"{message} (estimated rank deficiency {rank_deficiency})")


class TrappedSubspaceError(SingularMatrixError):
    """The Liouvillian has a zero mode, so no unique steady state exists."""


class DefectiveMatrixError(NumericalError):
    """Matrix lacks a complete set of eigenvectors."""


class NonDecayingModeError(NumericalError):
    """An eigenmode does not decay (Re eigenvalue >= 0)."""

    def __init__(self, eigenvalue):
        self.eigenvalue = eigenvalue
        super().__init__(
            f"eigenvalue {eigenvalue.real:.6g}{eigenvalue.imag:+.6g}j does not decay; "
            "the model has a trapped or growing subspace"
        )


class InstabilityError(NumericalError):
    """Explicit integration blew up."""


class MetricCorruptionError(NumericalError):
    """A quadratic form that must be real came out complex."""
