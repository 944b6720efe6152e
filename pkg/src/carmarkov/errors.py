"""Exception hierarchy for carmarkov."""


class CarMarkovError(Exception):
    """Base class for all library errors."""


class NonHermitianInput(CarMarkovError, ValueError):
    pass


class NegativeEigenvalue(CarMarkovError, ValueError):
    pass


class DimensionMismatch(CarMarkovError, ValueError):
    pass


class ConvergenceError(CarMarkovError, RuntimeError):
    pass


class TooManyModes(CarMarkovError, ValueError):
    pass


class OverlappingRegions(CarMarkovError, ValueError):
    pass


class InvalidDensity(CarMarkovError, ValueError):
    pass


class NotNested(CarMarkovError, ValueError):
    pass


class BothMarginalsNoneven(CarMarkovError, ValueError):
    """No product state extension exists when neither marginal is even."""


class TripleNotCommutingSquare(CarMarkovError, ValueError):
    pass


class NotOdd(CarMarkovError, ValueError):
    pass


class NormTooLarge(CarMarkovError, ValueError):
    pass


class SingularDensity(CarMarkovError, ValueError):
    pass


class LambdaOutOfRange(CarMarkovError, ValueError):
    pass


class UnsupportedSize(CarMarkovError, ValueError):
    pass


class BadSplit(CarMarkovError, ValueError):
    pass


class ReconstructionFailed(CarMarkovError, ValueError):
    pass


class ComponentNotProduct(CarMarkovError, ValueError):
    pass


class ConfigError(CarMarkovError, ValueError):
    pass
