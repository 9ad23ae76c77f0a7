# -*- coding: utf-8 -*-

from typing import Optional


class SynforgeError(Exception):
    """Base class for every error raised by synforge."""


class ConfigError(SynforgeError):
    pass


class GrammarError(SynforgeError):

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AstError(SynforgeError):

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TransitionError(SynforgeError):
    pass


class OracleError(SynforgeError):
    pass


class DataError(SynforgeError):

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        if index is not None:
            message = f"example {index}: {message}"
        super().__init__(message)


class CheckpointError(SynforgeError):
    pass


class TrainingError(SynforgeError):
    pass
