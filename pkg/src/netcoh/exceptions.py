"""Exception types shared across the package."""


class NetcohError(Exception):
    """Base class for all netcoh errors."""


class DataError(NetcohError):
    """Invalid input data (bad edges, dimension mismatch, bad response)."""


class EstimatorNotExistError(NetcohError):
    """The penalized estimator does not exist (Assumption-1 style failure).

    Typically raised when the Schur complement of the block system is
    numerically singular.  Setting gamma > 0 always repairs this.
    """
