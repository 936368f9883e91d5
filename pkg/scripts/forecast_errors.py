#!/usr/bin/env python3
"""
Forecaster Errors
Exception hierarchy shared by the forecasters, the dataset loaders and the CLI
"""


class ForecastError(Exception):
    """Base class for every error raised by the kernel forecasting engine"""

    exit_code = 1


class InputError(ForecastError):
    """Bad input: dimension mismatch, non-finite values, unreadable files"""

    exit_code = 2


class ParseError(InputError):
    """A data file could not be parsed"""

    def __init__(self, path: str, line: int, reason: str):
        self.path = path
        self.line = line
        self.reason = reason
        super().__init__(f"{path}: line {line}: {reason}")


class ConfigError(InputError):
    """Invalid or incomplete configuration"""


class CapacityError(InputError):
    """A requested basis or search grid is too large to materialise"""


class ProtocolError(ForecastError):
    """Step/label alternation violated"""

    exit_code = 3


class NumericError(ForecastError):
    """Factorization failure or a matrix outside its expected spectral range"""

    exit_code = 4
