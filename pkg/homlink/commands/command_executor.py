# commands/command_executor.py
from homlink.core.errors import (
    EXIT_CONFIG_ERROR,
    EXIT_NUMERICAL_FAILURE,
    EXIT_OK,
    HomLinkError,
)
from homlink.utils.debug_logger import get_logger

log = get_logger("commands.executor")


def execute_command(command_name: str, arguments: dict, command_mapping: dict[str, callable]) -> int:
    """
    Finds and executes the appropriate command function from a provided mapping.

    Returns the process exit code: 0 on success, 2 for configuration or schema
    errors, 3 for numerical failures.
    """
    if command_name not in command_mapping:
        log.error(f"Command '{command_name}' not found.")
        return EXIT_CONFIG_ERROR

    command_function = command_mapping[command_name]
    try:
        result = command_function(**arguments)
        return EXIT_OK if result is None else int(result)
    except HomLinkError as e:
        if e.exit_code == EXIT_CONFIG_ERROR:
            log.error(f"{command_name}: {e}")
        else:
            log.critical(f"{command_name}: {type(e).__name__}: {e}")
        return e.exit_code
    except TypeError as e:
        # Mismatched argument names between the JSON descriptor and the function
        log.critical(f"Invalid arguments for command '{command_name}': {e}", exc_info=True)
        return EXIT_NUMERICAL_FAILURE
    except Exception as e:
        log.critical(f"An unexpected error occurred in '{command_name}': {e}", exc_info=True)
        return EXIT_NUMERICAL_FAILURE
