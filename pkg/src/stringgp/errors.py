"""Exception types raised across the package."""


class StringGPError(Exception):
    """Base class for all package errors."""


class InvalidCharacter(StringGPError, ValueError):
    def __init__(self, position, char, lineno=None):
        self.position = position
        self.char = char
        self.lineno = lineno
        where = f"line {lineno}, " if lineno is not None else ""
        super().__init__(f"{where}invalid character {char!r} at position {position}")


class SequenceTooShort(StringGPError, ValueError):
    pass


class OrderMismatch(StringGPError, ValueError):
    pass


class NotSquare(StringGPError, ValueError):
    pass


class CholeskyFailure(StringGPError, ArithmeticError):
    pass


class UnsupportedTarget(StringGPError, ValueError):
    pass


class TooFewPoints(StringGPError, ValueError):
    pass


class LengthMismatch(StringGPError, ValueError):
    pass


class NoPositives(StringGPError, ValueError):
    pass


class AllBinsEmpty(StringGPError, ValueError):
    pass


class UnequalLengths(StringGPError, ValueError):
    pass


class MalformedLine(StringGPError, ValueError):
    def __init__(self, lineno, message="malformed line"):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class UnexpectedLength(StringGPError, ValueError):
    def __init__(self, lineno, length, expected):
        self.lineno = lineno
        super().__init__(f"line {lineno}: sequence length {length}, expected {expected}")


class EmptyDataset(StringGPError, ValueError):
    pass


class InvalidSpec(StringGPError, ValueError):
    pass


class ConfigError(StringGPError, ValueError):
    pass


class MissingInput(StringGPError, FileNotFoundError):
    pass
