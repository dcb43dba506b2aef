"""Exception hierarchy shared across modules."""


class KGMotiveError(Exception):
    pass


class ContractViolation(KGMotiveError, ValueError):
    """An argument broke a documented precondition (overlapping instances,
    out-of-range indices, inconsistent degree sequences, ...)."""


class NTriplesError(KGMotiveError, ValueError):
    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class PatternError(KGMotiveError, ValueError):
    pass


class ResolutionError(PatternError):
    """A constant term in pattern text is not in the dictionary."""


class PatternValidityError(PatternError):
    pass


class CanonicalSizeError(PatternError):
    pass


class InitializationError(KGMotiveError):
    """The graph has no triple a search could start from."""


class SearchStuck(KGMotiveError):
    """No transition applies to the current pattern."""


class InjectionError(KGMotiveError):
    pass
