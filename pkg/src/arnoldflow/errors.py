"""Exception hierarchy shared across the package."""


class ArnoldFlowError(Exception):
    """Base class for all package errors."""


class DepthExceeded(ArnoldFlowError):
    """A continued-fraction index beyond the computed truncation was requested."""


class InsufficientPrecision(ArnoldFlowError):
    """A decimal input does not carry enough digits to certify the requested expansion."""


class RationalInput(ArnoldFlowError):
    """The input value is rational; its continued fraction terminates."""


class NotRepresentable(ArnoldFlowError):
    """Integer outside the range covered by the truncated Ostrowski numeration."""


class InvalidDigits(ArnoldFlowError):
    """Ostrowski digit string violates the digit constraints."""


class BudgetExceeded(ArnoldFlowError):
    """An operation would exceed its declared computational budget."""


class SingularOrbit(ArnoldFlowError):
    """An orbit point fell within the guard distance of the roof singularity."""


class SingularPoint(ArnoldFlowError):
    """Roof evaluation requested exactly at the singular point."""


class NonPositiveRoof(ArnoldFlowError):
    """Roof construction or normalization produced a non-positive function."""


class HypothesisFailed(ArnoldFlowError):
    """The hypotheses of the estimate under verification do not hold for this input."""


class ScaleOutOfRange(ArnoldFlowError):
    """Point distance falls outside the range of computable variation scales."""


class DecompositionFailed(ArnoldFlowError):
    """2x2 matrix does not admit the requested local-coordinate decomposition."""


class InvalidTriple(ArnoldFlowError):
    """Reparametrization triple violates the almost-linearity constraints."""


class SequenceTooShort(ArnoldFlowError):
    """Input sequence does not cover the index range required by the statistic."""


class ConfigInvalid(ArnoldFlowError):
    """Experiment configuration failed schema validation."""
