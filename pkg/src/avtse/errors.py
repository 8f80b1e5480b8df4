"""Exception hierarchy shared across the package."""


class AvtseError(Exception):
    """Base class for all package errors."""


class InvalidInputError(AvtseError, ValueError):
    """An input violates an operation precondition (shape, length, content)."""


class ConfigurationError(AvtseError, ValueError):
    """A configuration value or combination of values is not permitted."""


class FileFormatError(AvtseError, ValueError):
    """A file on disk could not be parsed.

    Attributes:
        path: offending file.
        offset: byte offset at which parsing failed, when known.
    """

    def __init__(self, message, path=None, offset=None):
        detail = message
        if path is not None:
            detail = f"{path}: {detail}"
        if offset is not None:
            detail = f"{detail} (byte offset {offset})"
        super().__init__(detail)
        self.path = path
        self.offset = offset


class CorpusError(AvtseError, RuntimeError):
    """Corpus construction or loading failed (missing files, conflicts)."""


class TrainingError(AvtseError, RuntimeError):
    """The training loop hit an unrecoverable state (e.g. non-finite loss)."""
