"""Exception hierarchy shared by every stage of the pipeline."""


class RDCError(Exception):
    """Base class for all errors raised by rdc."""


class DataError(RDCError):
    """Input data is malformed, corrupt or inconsistent."""


# sequence_io

class EmptyInputError(DataError):
    pass


class InvalidSymbolError(DataError):
    def __init__(self, record_id, position, symbol):
        self.record_id = record_id
        self.position = position
        self.symbol = symbol
        super().__init__(
            f"record {record_id!r}: invalid symbol {symbol!r} at position {position}"
        )


class DuplicateIdError(DataError):
    def __init__(self, record_id):
        self.record_id = record_id
        super().__init__(f"duplicate sequence id {record_id!r}")


class EmptyRecordError(DataError):
    def __init__(self, record_id):
        self.record_id = record_id
        super().__init__(f"record {record_id!r} has no bases")


class TruncatedStreamError(DataError):
    pass


# alignment

class SizeLimitExceededError(RDCError):
    def __init__(self, cells, budget):
        self.cells = cells
        self.budget = budget
        super().__init__(f"alignment needs {cells} DP cells, budget is {budget}")


# diffcodec

class BothGapsError(DataError):
    pass


class LocationOutOfRangeError(DataError):
    pass


class LengthMismatchError(DataError):
    def __init__(self, target_id, expected, actual):
        self.target_id = target_id
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"record {target_id!r}: reconstructed {actual} bases, expected {expected}"
        )


class InvalidReplacementError(DataError):
    pass


class NotSortedError(DataError):
    pass


class InvalidGapError(DataError):
    pass


# entropy

class EmptyDistributionError(RDCError):
    pass


class SymbolNotInModelError(DataError):
    pass


class TruncatedBitsError(DataError):
    pass


class DanglingBitsError(DataError):
    pass


class CorruptStreamError(DataError):
    pass


# archive

class UnknownIdError(RDCError):
    def __init__(self, target_id):
        self.target_id = target_id
        super().__init__(f"no sequence with id {target_id!r} in archive")


class InvalidRateError(RDCError):
    pass
