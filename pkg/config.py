from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

APP_NAME = "relayscope"
APP_VERSION = "1.0.0"


class Settings(BaseSettings):
    LOG_LEVEL: str = "INFO"
    LOG_FILE: str = "logs/relayscope.log"

    # Worker threads for episode generation and evaluation
    THREADS: int = 1

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, value: str) -> str:
        value = value.upper()
        if value not in {"TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Invalid log level: {value}")
        return value

    @field_validator("THREADS")
    @classmethod
    def validate_threads(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"THREADS must be >= 1, got {value}")
        return value

    model_config = SettingsConfigDict(env_file=".env", env_prefix="RELAYSCOPE_")


settings = Settings()
