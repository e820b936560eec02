import argparse
import sys
import traceback
from typing import Callable

from loguru import logger
from pydantic import ValidationError as PydanticValidationError

from core.exceptions.base import RelayscopeError
from core.exceptions.config import UsageError

EXIT_FAILURE = 1
EXIT_USAGE = 2


class CommandParser(argparse.ArgumentParser):
    """argparse parser whose usage errors go through the common error line."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def error_line(kind: str, detail: str) -> str:
    return f"error: {kind}: {' '.join(str(detail).split())}"


def report_error(kind: str, detail: str) -> None:
    print(error_line(kind, detail), file=sys.stderr)


def handle_command(handler: Callable[[argparse.Namespace], None], args: argparse.Namespace) -> int:
    try:
        handler(args)
        return 0
    except UsageError as exc:
        report_error(exc.kind, exc.message)
        return EXIT_USAGE
    except RelayscopeError as exc:
        logger.debug(f"{type(exc).__name__}: {exc.message}")
        report_error(exc.kind, exc.message)
        return EXIT_FAILURE
    except PydanticValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "<root>"
        report_error("config", f"{location}: {first['msg']}")
        return EXIT_FAILURE
    except OSError as exc:
        report_error("io", str(exc))
        return EXIT_FAILURE
    except Exception as exc:
        logger.error(f"Unhandled exception: {exc} | Traceback: {traceback.format_exc()}")
        report_error("internal", f"{type(exc).__name__}: {exc}")
        return EXIT_FAILURE
