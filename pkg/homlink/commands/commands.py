# commands/commands.py
import json
from pathlib import Path

from homlink.commands.commands_lib import dispersion_commands, fit_commands, scan_commands
from homlink.utils.debug_logger import get_logger

log = get_logger("commands.init")

COMMAND_MODULES = [scan_commands, fit_commands, dispersion_commands]

# --- Global Command Variables ---
ALL_COMMAND_DEFINITIONS: list[dict] = []
COMMAND_MAPPING: dict[str, callable] = {}


def _load_all_commands_from_modules():
    """
    Loads all command definitions and functions from the library modules.
    - Calls get_mapping() on each module for the functions.
    - Loads definitions from a corresponding .json file for each module.
    """
    for module in COMMAND_MODULES:
        if not hasattr(module, 'get_mapping'):
            log.warning(f"Module {module.__name__} is missing the 'get_mapping()' function. Skipping.")
            continue
        COMMAND_MAPPING.update(module.get_mapping())

        json_path = Path(module.__file__).with_suffix('.json')
        if not json_path.exists():
            log.warning(f"JSON file not found for module {module.__name__} at {json_path}. Skipping definitions.")
            continue
        with open(json_path, 'r', encoding='utf-8') as f:
            module_definitions = json.load(f)

        # A single command dict or a list of them
        if isinstance(module_definitions, list):
            ALL_COMMAND_DEFINITIONS.extend(module_definitions)
        elif isinstance(module_definitions, dict):
            ALL_COMMAND_DEFINITIONS.append(module_definitions)
        else:
            log.warning(f"Invalid format in {json_path}. Expected a JSON object or list.")

    missing = [d['function']['name'] for d in ALL_COMMAND_DEFINITIONS
               if d['function']['name'] not in COMMAND_MAPPING]
    if missing:
        log.warning(f"Definitions without an implementation: {missing}")
    log.debug(
        f"Loaded {len(ALL_COMMAND_DEFINITIONS)} command definitions and {len(COMMAND_MAPPING)} functions."
    )


def initialize_commands() -> tuple[list[dict], dict[str, callable]]:
    """Load the registry once and return (definitions, mapping)."""
    if not COMMAND_MAPPING:
        _load_all_commands_from_modules()
    return ALL_COMMAND_DEFINITIONS, COMMAND_MAPPING
