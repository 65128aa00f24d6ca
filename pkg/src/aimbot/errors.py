"""Exception types shared across the package."""


class AimbotError(Exception):
    """Base class for all package errors."""


class ValidationError(AimbotError, ValueError):
    """An input violates a documented invariant or precondition."""


class ManifestError(AimbotError):
    """An episode manifest is missing, unreadable, or malformed."""

    def __init__(self, message: str, path=None):
        super().__init__(message)
        self.path = path


class FrameError(AimbotError):
    """A frame references a file that is missing or cannot be decoded."""

    def __init__(self, message: str, path=None):
        super().__init__(message)
        self.path = path


class SceneFileError(AimbotError):
    """A scene or trajectory file failed to parse; carries line context."""

    def __init__(self, message: str, path=None, line: int | None = None):
        if line is not None:
            message = f"{path or '<scene>'}:{line}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line
