"""Exception types shared across the package."""


class OrganPointError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(OrganPointError):
    """A byte stream could not be decoded as the expected format."""


class MalformedHeader(ParseError):
    pass


class TruncatedData(ParseError):
    pass


class UnsupportedDatatype(ParseError):
    pass


class UnsupportedDimensionality(ParseError):
    pass


class UnsupportedVersion(ParseError):
    pass


class ConsistencyError(OrganPointError):
    """Inputs disagree with each other or with a declared contract."""


class DimensionMismatch(ConsistencyError):
    pass


class DimsMismatch(ConsistencyError):
    pass


class NonPositiveSpacing(ConsistencyError):
    pass


class SpacingMismatch(ConsistencyError):
    pass


class EmptyMask(ConsistencyError):
    pass


class EmptyCounts(ConsistencyError):
    pass
