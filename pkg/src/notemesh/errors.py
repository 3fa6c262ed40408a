"""Exception types raised across notemesh."""


class NotemeshError(Exception):
    """Base class for all notemesh errors."""


class RangeError(NotemeshError, ValueError):
    """A numeric argument lies outside its permitted range."""


class SchemaError(NotemeshError, ValueError):
    """A JSON document does not match the score schema.

    ``path`` is a JSON pointer to the first offending location.
    """

    def __init__(self, path, message=""):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if message else path)


class FormatError(NotemeshError, ValueError):
    """Malformed or unsupported Standard MIDI File data."""


class EmptyScore(NotemeshError, ValueError):
    """The score holds nothing the operation can work on."""


class UnsupportedMode(NotemeshError, ValueError):
    """The operation is only defined for major and minor keys."""


class KeyMismatch(NotemeshError, ValueError):
    """Too many notes fall outside the assumed source key."""


class GrammarError(NotemeshError, ValueError):
    """A token stream violates the token grammar at ``index``."""

    def __init__(self, index, message):
        self.index = index
        super().__init__(f"token {index}: {message}")


class DanglingNoteError(GrammarError):
    """A NOTE_ON has no NOTE_OFF before its track closes."""


class UnknownToken(NotemeshError, ValueError):
    """Token text that is not part of the vocabulary."""

    def __init__(self, token):
        self.token = token
        super().__init__(token)


class InsufficientData(NotemeshError, ValueError):
    """Too few notes for a reliable estimate."""


class InsufficientSamples(NotemeshError, ValueError):
    """Too few samples to form the requested distance set or density."""


class KindMismatch(NotemeshError, ValueError):
    """Two feature values of different kinds were compared."""


class DatasetError(NotemeshError):
    """One or more files of a dataset could not be read.

    ``failures`` maps each offending path to its error message.
    """

    def __init__(self, failures, message=None):
        self.failures = dict(failures)
        if message is None:
            listed = ", ".join(sorted(str(p) for p in self.failures))
            message = f"unreadable files: {listed}" if listed else "no files"
        super().__init__(message)


class TrackOutOfRange(NotemeshError, IndexError):
    """The requested track index does not exist in the score."""


class EmptyRange(NotemeshError, ValueError):
    """The requested bar range contains no bars."""
