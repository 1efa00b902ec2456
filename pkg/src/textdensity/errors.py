"""Exception types shared across the toolkit.

Plain domain errors on pure functions (bad probability, empty document)
raise ValueError; the classes below cover I/O and pipeline failures that
need to carry context such as a line number or document id.
"""


class ToolkitError(Exception):
    """Base class for toolkit-specific failures."""


class ParseError(ToolkitError):
    """A file could not be decoded. Carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(ToolkitError):
    """Well-formed input that violates a documented contract."""


class DuplicateDocumentError(ValidationError):
    """Two records share a document id."""


class AlignmentError(ValidationError):
    """External token/probability data disagrees with toolkit tokenization.

    Carries the document id and the first mismatching token index.
    """

    def __init__(self, message: str, doc_id: str, index: int):
        super().__init__(f"doc {doc_id!r}, token {index}: {message}")
        self.doc_id = doc_id
        self.index = index


class TrainingError(ToolkitError):
    """A model cannot be trained from the given corpus."""
