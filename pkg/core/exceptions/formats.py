from core.exceptions.base import RelayscopeError


class FormatError(RelayscopeError):
    kind = "format"

    def __init__(self, message: str, offset: int | None = None) -> None:
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ParseError(RelayscopeError):
    kind = "parse"

    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class ArtifactMissing(RelayscopeError):
    kind = "missing"
