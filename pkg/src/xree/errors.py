"""Exception types shared across the package."""


class XreeError(Exception):
    """Base class for all package-specific errors."""


class StructureViolation(XreeError):
    """Matrix does not have the six-element (X) structure."""


class InvalidParams(XreeError):
    """State parameters or matrix fail a physical-validity invariant."""


class NonPositive(XreeError):
    """A quantity that must be strictly positive is not."""


class NotEntangled(XreeError):
    """Operation requires an entangled input state."""


class DegenerateParams(XreeError):
    """Closed form is indeterminate here; caller should use the diagonal solver."""


class ConvergenceFailure(XreeError):
    """Iterative solver failed to reach its residual tolerance."""


class CertificationFailure(XreeError):
    """A candidate solution failed the optimality certificate."""


class SupportDeficient(XreeError):
    """Candidate separable state has (numerically) vanishing eigenvalues."""


class ParseError(XreeError):
    """State-specification document could not be parsed."""
