"""
This module defines the exceptions raised across the EMTC package.

Input problems are reported as ``ValueError`` subclasses so callers that
only catch ``ValueError`` keep working.
"""


class TsFormatError(ValueError):
    """
    Raised when a ``.ts`` file does not follow the UEA format.

    :param message: What is wrong with the file.
    :type message: str
    :param line_number: The 1-based line number of the offending line, defaults to None.
    :type line_number: int, optional
    :param line: The offending line text, defaults to None.
    :type line: str, optional
    """
    def __init__(self, message: str, line_number: int = None, line: str = None):
        self.line_number = line_number
        self.line = line
        if line_number is not None:
            message = f"line {line_number}: {message} ({line!r})"
        super().__init__(message)


class EmptyDatasetError(ValueError):
    """Raised when a dataset has no samples."""


class ShapeError(ValueError):
    """Raised when tensor shapes do not agree with the parameters they meet."""


class ArgumentError(ValueError):
    """Raised when an argument is outside its allowed range."""


class DatasetNotFoundError(FileNotFoundError):
    """
    Raised when a dataset cannot be found in any search location.

    :param name: The dataset name that was requested.
    :type name: str
    :param searched: Every path that was tried.
    :type searched: list[str]
    """
    def __init__(self, name: str, searched):
        self.name = name
        self.searched = list(searched)
        lines = [f"Dataset '{name}' not found. Searched:"]
        lines += [f"  {path}" for path in self.searched]
        lines.append(
            "Download the UEA archive from https://www.timeseriesclassification.com "
            "and pass --data-dir, or point --dataset-path at a .ts file."
        )
        super().__init__("\n".join(lines))


class NonFiniteError(ArithmeticError):
    """Raised when a loss, logit or embedding stops being finite."""
