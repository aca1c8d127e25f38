import argparse
import sys

from homlink.commands.command_executor import execute_command
from homlink.commands.commands import initialize_commands
from homlink.utils.debug_logger import (
    LOG_LEVEL_MAP,
    default_log_file,
    level_from_name,
    setup_logger,
    shutdown_logger,
)

ARGUMENT_TYPES = {"string": str, "integer": int, "number": float}
GLOBAL_OPTIONS = ("command", "log_level", "log_file")


def build_parser(definitions: list[dict]) -> argparse.ArgumentParser:
    """One subcommand per JSON command definition."""
    parser = argparse.ArgumentParser(
        prog="homlink",
        description="Two-photon interference over a long fiber Mach-Zehnder link.",
    )
    parser.add_argument("--log-level", default="INFO", choices=list(LOG_LEVEL_MAP),
                        help="Console and file log level.")
    parser.add_argument("--log-file", default=None,
                        help="Log file path; an empty string disables file logging.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for definition in definitions:
        function = definition["function"]
        command = subparsers.add_parser(function["name"], help=function["description"],
                                        description=function["description"])
        for name, prop in function["parameters"]["properties"].items():
            kwargs = {"help": prop.get("description")}
            if prop.get("positional"):
                command.add_argument(name, **kwargs)
                continue
            if prop["type"] == "boolean":
                kwargs["action"] = "store_true"
            else:
                kwargs["type"] = ARGUMENT_TYPES[prop["type"]]
                kwargs["default"] = prop.get("default")
                if "enum" in prop:
                    kwargs["choices"] = prop["enum"]
            command.add_argument(prop["flag"], dest=name, **kwargs)
    return parser


def main(argv: list[str] | None = None) -> int:
    definitions, mapping = initialize_commands()
    args = build_parser(definitions).parse_args(argv)

    log_file = default_log_file() if args.log_file is None else (args.log_file or None)
    setup_logger(level_from_name(args.log_level), log_file)
    try:
        arguments = {k: v for k, v in vars(args).items() if k not in GLOBAL_OPTIONS}
        return execute_command(args.command, arguments, mapping)
    finally:
        shutdown_logger()


if __name__ == '__main__':
    sys.exit(main())
