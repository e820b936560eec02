from core.exceptions.base import RelayscopeError


class ConfigurationError(RelayscopeError):
    kind = "config"


class UsageError(RelayscopeError):
    kind = "usage"
