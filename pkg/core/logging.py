import sys
from contextlib import contextmanager
from typing import Iterator

from loguru import logger

from config import APP_NAME, settings

NO_STAGE = "-"

# command and pipeline stage, e.g. "reproduce/train-cql"
_CONTEXT = "{extra[command]}/{extra[stage]}"

CONSOLE_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | "
    f"<magenta>{_CONTEXT}</magenta> - <level>{{message}}</level>"
)
FILE_FORMAT = (
    "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | "
    f"{_CONTEXT} | {{name}}:{{function}}:{{line}} - {{message}}"
)


def configure_logging(level: str | None = None, command: str = APP_NAME) -> None:
    """stderr and rotating file sinks; every record is tagged with command and stage."""
    level = (level or settings.LOG_LEVEL).upper()

    logger.remove()
    logger.configure(extra={"command": command, "stage": NO_STAGE})

    # stdout is reserved for the one-line command summary
    logger.add(sys.stderr, format=CONSOLE_FORMAT, level=level, colorize=True)

    logger.add(
        settings.LOG_FILE,
        format=FILE_FORMAT,
        level=level,
        rotation="50 MB",
        retention=5,
        compression="zip",
    )

    logger.debug(f"Logging configured with level: {level}")


@contextmanager
def stage_context(stage: str) -> Iterator[None]:
    """Tag records logged in this thread with a pipeline stage name."""
    with logger.contextualize(stage=stage):
        yield
