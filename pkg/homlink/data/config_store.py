from __future__ import annotations

from pathlib import Path

from homlink.core.errors import ConfigError
from homlink.data.defaults import DEFAULT_CONFIG
from homlink.utils.debug_logger import get_logger


class ConfigStore:
    """
    Nested configuration values addressed with dot notation strings.

    Example:
        store.set("fiberA.length_km", 25.3)
        length = store.get("fiberA.length_km")

    Files use one ``key = value`` per line with ``#`` comments. Keys outside
    the known set are rejected, and so is a key given twice in one file.
    """

    def __init__(self, defaults: dict[str, object] | None = None):
        self._data: dict = {}
        self._known = dict(DEFAULT_CONFIG if defaults is None else defaults)
        for key, value in self._known.items():
            self.set(key, value)
        self.log = get_logger()

    @property
    def known_keys(self) -> list[str]:
        return sorted(self._known)

    def get(self, key_path: str, default=None):
        """
        Retrieves a value from the nested data using a dot-separated path.

        Returns ``default`` when the path does not exist.
        """
        current_level = self._data
        try:
            for key in key_path.split('.'):
                current_level = current_level[key]
            return current_level
        except (KeyError, TypeError):
            return default

    def set(self, key_path: str, value):
        """
        Sets a value in the nested data using a dot-separated path.
        Creates nested dictionaries as needed.
        """
        keys = key_path.split('.')
        current_level = self._data
        for key in keys[:-1]:
            current_level = current_level.setdefault(key, {})
            if not isinstance(current_level, dict):
                raise ConfigError(key_path, f"part of the path '{key}' is not a section")
        current_level[keys[-1]] = value

    def load_text(self, text: str, source: str = "<config>"):
        seen: dict[str, int] = {}
        for lineno, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.split('#', 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition('=')
            key, value = key.strip(), value.strip()
            if not sep or not key:
                raise ConfigError(f"{source}:{lineno}", "expected 'key = value'")
            if key not in self._known:
                raise ConfigError(key, f"unknown key ({source}:{lineno})")
            if key in seen:
                raise ConfigError(key, f"duplicate key ({source}:{lineno}, first at line {seen[key]})")
            seen[key] = lineno
            self.set(key, value)
        self.log.debug(f"Loaded {len(seen)} keys from {source}")

    def load(self, path: str | Path):
        path = Path(path)
        try:
            data = path.read_bytes()
        except OSError as e:
            raise ConfigError(str(path), f"cannot read config file: {e.strerror or e}") from e
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            lineno = data.count(b"\n", 0, e.start) + 1
            raise ConfigError(f"{path}:{lineno}", "not valid UTF-8") from None
        self.load_text(text, source=str(path))

    def flatten(self) -> dict[str, object]:
        """All known keys with their current values, sorted by key."""
        return {key: self.get(key) for key in self.known_keys}
