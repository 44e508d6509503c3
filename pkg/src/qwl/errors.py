"""Exception hierarchy shared by every module."""


class QwlError(Exception):
    """Base class for all toolkit errors."""


class NonHermitianInput(QwlError):
    pass


class NonHermitianMap(QwlError):
    pass


class DomainError(QwlError, ValueError):
    pass


class NonConvergence(QwlError):
    pass


class DimensionMismatch(QwlError, ValueError):
    pass


class NotCompletelyPositive(QwlError):
    pass


class RangeEscapesSpan(QwlError):
    pass


class DegenerateInternal(UserWarning):
    """Warning: an internal eigenvalue sits inside the positivity floor."""


class NotConditionallyNegative(QwlError):
    pass


class UnitLowerBoundViolated(QwlError):
    pass


class InadmissiblePair(QwlError, ValueError):
    pass


class NotIdempotent(QwlError):
    pass


class OperandOutsideRange(QwlError):
    pass


class NumericallyDegenerateCenter(QwlError):
    pass


class NotPositive(QwlError):
    pass


class HypothesisViolated(QwlError):
    def __init__(self, check, detail=""):
        self.check = check
        super().__init__(f"{check}: {detail}" if detail else check)


class SpecInvalid(QwlError):
    pass


class PsiNotInvertible(SpecInvalid):
    pass


class PsiInverseNotCP(SpecInvalid):
    pass


class ConditionalNegativityFailure(SpecInvalid):
    pass


class UnitInequalityFailure(SpecInvalid):
    pass


class SingularResolvent(SpecInvalid):
    pass


class EtaNotDominated(SpecInvalid):
    pass


class PsiPrimeConditionFailure(SpecInvalid):
    pass


class NotQPure(QwlError):
    pass


class NotUnital(QwlError):
    pass


class WitnessMalformed(QwlError):
    pass


class ParseError(QwlError):
    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)
