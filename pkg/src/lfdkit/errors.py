"""Exception classes shared across the toolkit."""


class LfdError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(LfdError, ValueError):
    """A parameter is outside its admissible domain (bad gain, step size, count...)."""


class InputFormatError(LfdError, ValueError):
    """Input data is malformed: bad CSV row, non-monotone time, mismatched grids."""


class FormatError(LfdError, ValueError):
    """A serialized document is not in the expected format (NPY header, JSON schema)."""


class ValidationError(LfdError, ValueError):
    """A value violates a semantic invariant (non-rigid matrix, duplicate name...)."""


class NumericError(LfdError, ArithmeticError):
    """Numerical integration or fitting produced non-finite values."""
