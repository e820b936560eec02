import sys

from loguru import logger

from commands import (
    register_data,
    register_evaluate,
    register_learn,
    register_maps,
    register_reproduce,
)
from commands.errors import EXIT_USAGE, CommandParser, handle_command, report_error
from config import APP_NAME, APP_VERSION
from core.exceptions.config import UsageError
from core.logging import configure_logging


def _register_commands(parser: CommandParser) -> None:
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=CommandParser)
    register_maps(subparsers)
    register_data(subparsers)
    register_learn(subparsers)
    register_evaluate(subparsers)
    register_reproduce(subparsers)


def create_parser() -> CommandParser:
    parser = CommandParser(
        prog=APP_NAME,
        description="Terrain-aware UAV relay simulation and offline RL workbench",
    )
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"],
        default=None,
        help="Override RELAYSCOPE_LOG_LEVEL for this run",
    )

    _register_commands(parser)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = create_parser().parse_args(argv)
    except UsageError as exc:
        report_error(exc.kind, exc.message)
        return EXIT_USAGE

    configure_logging(args.log_level, command=args.command)
    logger.debug(f"Running {args.command}")
    return handle_command(args.handler, args)


if __name__ == "__main__":
    sys.exit(main())
