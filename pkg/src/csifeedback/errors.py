"""Exception hierarchy shared across the package."""


class CsiFeedbackError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(CsiFeedbackError):
    """Tensor or matrix dimensions violate an operation's contract."""


class DegenerateSampleError(CsiFeedbackError):
    """An all-zero (or otherwise unusable) sample where a nonzero one is required."""


class RankDeficientError(CsiFeedbackError):
    """Source matrix for orthonormalization does not have full row rank."""


class DivergenceError(CsiFeedbackError):
    """Solver iterate became non-finite."""

    def __init__(self, iteration: int):
        super().__init__(f"non-finite iterate at iteration {iteration}")
        self.iteration = iteration


class WeightsFormatError(CsiFeedbackError):
    """Base class for weights-file problems."""


class WeightsMagicError(WeightsFormatError):
    pass


class WeightsTruncatedError(WeightsFormatError):
    pass


class WeightsChannelError(WeightsFormatError):
    pass


class WeightsValueError(WeightsFormatError):
    """Non-finite weight or bias values."""


class DatasetFormatError(CsiFeedbackError):
    """Base class for dataset-file problems."""


class DatasetMagicError(DatasetFormatError):
    pass


class DatasetTruncatedError(DatasetFormatError):
    pass


class DatasetDtypeError(DatasetFormatError):
    pass
