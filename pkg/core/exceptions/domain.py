from core.exceptions.base import RelayscopeError


class DomainError(RelayscopeError):
    kind = "domain"


class StateError(RelayscopeError):
    kind = "state"


class DimensionMismatch(DomainError):
    kind = "dimension"

    def __init__(self, what: str, expected: object, actual: object) -> None:
        super().__init__(f"{what}: expected {expected}, got {actual}")
        self.expected = expected
        self.actual = actual
