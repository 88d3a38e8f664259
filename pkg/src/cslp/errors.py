"""Exception hierarchy shared by every module of the package."""


class SlpError(ValueError):
    """Base class for grammar errors."""


class ParseError(SlpError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CyclicGrammar(SlpError):
    def __init__(self, message, var=None):
        self.var = var
        super().__init__(message)


class Redefinition(SlpError):
    pass


class UnknownSymbol(SlpError):
    pass


class NonPositiveWeight(SlpError):
    pass


class LengthOverflow(SlpError):
    """A length or weight does not fit into a 64-bit word."""


class OutputTooLarge(SlpError):
    pass


class EpsilonDerivation(SlpError):
    pass


class NotAVariable(SlpError):
    pass


class PositionOutOfRange(IndexError):
    pass


class NotAnAncestor(SlpError):
    pass


class NotACaterpillar(SlpError):
    pass


class MissingPrefixVariable(SlpError):
    pass


class NotContracting(SlpError):
    pass


class NotCnf(SlpError):
    pass


class CapacityExceeded(SlpError):
    pass


class TreeTooLarge(SlpError):
    pass


class HeightTooLarge(SlpError):
    pass


class FingerNotSet(RuntimeError):
    pass


class ShapeViolation(SlpError):
    pass
