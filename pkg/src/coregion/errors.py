"""Exception taxonomy shared across the toolkit.

Data-validation errors carry enough context (row, response, location) to be
actionable from the CLI; numerical errors signal conditions the caller may
want to retry or abort on.
"""


class CoregionError(Exception):
    """Base class for all toolkit errors."""


class DataError(CoregionError):
    """Invalid or inconsistent input data (CLI exit code 2)."""


class ConfigError(CoregionError):
    """Invalid run configuration (CLI exit code 1)."""


class NumericalError(CoregionError):
    """Numerical failure during fitting or prediction (CLI exit code 3)."""


class MissingColumn(DataError):
    def __init__(self, column):
        super().__init__(f"required column missing: {column!r}")
        self.column = column


class NonNumeric(DataError):
    def __init__(self, row, column, value):
        super().__init__(f"row {row}: column {column!r} is not numeric: {value!r}")
        self.row = row
        self.column = column


class NegativeResponse(DataError):
    def __init__(self, row, value):
        super().__init__(f"row {row}: negative response value {value}")
        self.row = row
        self.value = value


class DuplicateLocation(DataError):
    def __init__(self, response, row):
        super().__init__(f"row {row}: duplicate {response} location")
        self.response = response
        self.row = row


class EmptyLidar(DataError):
    def __init__(self):
        super().__init__("dataset has no lidar observations")


class MissingCovariate(DataError):
    def __init__(self, loc):
        super().__init__(f"tree cover required but missing at location {loc}")
        self.loc = loc


class InvalidGeometry(DataError):
    def __init__(self, msg):
        super().__init__(msg)


class TooFewObservations(DataError):
    def __init__(self, n, needed):
        super().__init__(f"{n} observations, need at least {needed}")
        self.n = n
        self.needed = needed


class TooFewPoints(DataError):
    def __init__(self, n, needed):
        super().__init__(f"{n} points, need at least {needed}")


class TooFewBins(DataError):
    def __init__(self, n, needed):
        super().__init__(f"{n} variogram bins, need at least {needed}")


class LengthMismatch(DataError):
    def __init__(self, a, b):
        super().__init__(f"length mismatch: {a} vs {b}")


class EmptyBlock(DataError):
    def __init__(self, block_id):
        super().__init__(f"block {block_id!r} has no member cells")
        self.block_id = block_id


class DegenerateAttribute(DataError):
    def __init__(self):
        super().__init__("block attribute has zero variance")


class DegenerateVariogram(DataError):
    def __init__(self):
        super().__init__("residuals are constant; variogram is degenerate")


class NonPositiveDecay(NumericalError):
    def __init__(self, phi):
        super().__init__(f"spatial decay must be positive, got {phi}")


class NotPositiveDefinite(NumericalError):
    def __init__(self, detail=""):
        super().__init__(f"matrix is not positive definite{': ' + detail if detail else ''}")


class OutOfSupport(NumericalError):
    def __init__(self, detail=""):
        super().__init__(f"value outside prior support{': ' + detail if detail else ''}")


class NonPositiveEstimate(NumericalError):
    def __init__(self, est):
        super().__init__(f"estimate must be positive to form an RSD, got {est}")


class ChainTooShort(NumericalError):
    def __init__(self, have, need):
        super().__init__(f"chain too short: {have} retained draws, need {need}")


class NumericalFailure(NumericalError):
    def __init__(self, detail):
        super().__init__(detail)


class SingularSystem(NumericalError):
    def __init__(self, detail=""):
        super().__init__(f"linear system is singular{': ' + detail if detail else ''}")


class FitDiverged(NumericalError):
    def __init__(self, detail=""):
        super().__init__(f"variogram fit failed to converge{': ' + detail if detail else ''}")
