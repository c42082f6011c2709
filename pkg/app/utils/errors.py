"""
Exception types shared by the QUBO preprocessing toolkit.
"""


class QproError(Exception):
    """Base class for every error raised by the toolkit."""


class QuboInputError(QproError, ValueError):
    """Invalid input: bad lengths, indices, configs, or coefficient overflow."""


class ContractViolation(QproError, RuntimeError):
    """An operation was applied when its precondition does not hold."""


class InstanceFormatError(QuboInputError):
    """
    Malformed instance, solution or report file.

    Args:
        message (str): What went wrong
        line_number (int, optional): 1-based line of the offending text
    """

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ExpansionError(QuboInputError):
    """A degree cap that the chain expansion cannot satisfy."""
