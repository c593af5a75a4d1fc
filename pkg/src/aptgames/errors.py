"""Exception types shared across the package."""


class ComparisonError(ValueError):
    """Raised when two losses cannot be ranked (mismatched scale, cutoff, or depth)."""


class EncodingRangeError(ValueError):
    """Raised when a coefficient does not fit the fixed-width scalar encoding."""


class ParseError(ValueError):
    """Raised on malformed input documents; ``location`` names the offending field."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)
