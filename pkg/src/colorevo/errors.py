"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented contract (bad normalization, bad range)."""


class FormatError(ValidationError):
    """A data file does not match its documented layout."""


class DataMissingError(FileNotFoundError):
    """An optional external dataset is not present."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to produce a usable result."""
