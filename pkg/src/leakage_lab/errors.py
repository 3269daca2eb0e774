"""Exception hierarchy.

Everything raised on bad input derives from :class:`ValidationError` (and
therefore also from :class:`ValueError`), so callers that only care about
"the input was wrong" can catch one type.  :class:`BudgetExceeded` is kept
separate because the input was fine, the requested search was just too big.
"""


class LeakageLabError(Exception):
    pass


class ValidationError(LeakageLabError, ValueError):
    pass


class ParseError(ValidationError):
    """Malformed mechanism file; carries the position when known."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class DimensionMismatch(ValidationError):
    pass


class NotAProbabilityVector(ValidationError):
    pass


class OutcomeOutsideSupport(ValidationError):
    pass


class DeltaOutOfRange(ValidationError):
    pass


class DeltaOutsideRegime(ValidationError):
    pass


class EtaOutOfRange(ValidationError):
    pass


class ThetaOutOfRange(ValidationError):
    pass


class ZeroProbabilityEvent(ValidationError):
    pass


class PriorMismatch(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass


class ZeroPriorEntry(ValidationError):
    pass


class EpsOutsideHighPrivacyRegime(ValidationError):
    pass


class PriorConditionViolated(ValidationError):
    """The prior condition of the k-RR lower bound fails.

    ``fallback`` holds the always-valid bound that is used instead.
    """

    def __init__(self, message, fallback):
        super().__init__(message)
        self.fallback = fallback


class BudgetExceeded(LeakageLabError):
    def __init__(self, message, size, budget):
        super().__init__(f"{message}: {size} candidates requested, budget is {budget}")
        self.size = size
        self.budget = budget
