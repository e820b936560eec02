class RelayscopeError(Exception):
    kind: str = "error"

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message
