"""Exception hierarchy shared by every stage of the descriptor."""


class BitwError(Exception):
    """Base class for all errors raised by :mod:`bitw`."""


class DataError(BitwError, ValueError):
    """Input data cannot be processed (bad file, bad shape, bad labels)."""


# raster I/O
class DecodeError(DataError):
    pass


class TooSmall(DataError):
    pass


class EmptyDataset(DataError):
    pass


class UnreadableDirectory(DataError):
    pass


# wavelet transform
class DegenerateGrid(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class TooShallow(DataError):
    pass


# diversity indices
class UndefinedForSinglePixel(DataError):
    pass


class NonFiniteCoefficient(DataError):
    pass


# evaluation
class EmptyTrainingSet(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class ClassTooSmall(DataError):
    pass


class SingularCovariance(DataError):
    pass


class SingleClassAUCUndefined(DataError):
    pass
