# debug_logger.py
import atexit
import inspect
import logging
import sys
from logging.handlers import QueueHandler, QueueListener, TimedRotatingFileHandler
from pathlib import Path
from queue import Queue

import platformdirs

APP_NAME = "HomLink"
APP_AUTHOR = "TPO-Code"
# --- Define custom log levels ---
VERBOSE_LEVEL_NUM = 5
VERBOSE_LEVEL_NAME = "VERBOSE"
logging.addLevelName(VERBOSE_LEVEL_NUM, VERBOSE_LEVEL_NAME)

FATAL_LEVEL_NUM = 60
FATAL_LEVEL_NAME = "FATAL"
logging.addLevelName(FATAL_LEVEL_NUM, FATAL_LEVEL_NAME)


class CustomLogger(logging.Logger):
    """
    A custom logger class that adds support for 'verbose' and 'fatal' levels.
    """

    def verbose(self, message, *args, **kws):
        """Logs a message with level VERBOSE."""
        if self.isEnabledFor(VERBOSE_LEVEL_NUM):
            self._log(VERBOSE_LEVEL_NUM, message, args, **kws)

    def fatal(self, message, *args, **kws):
        """Logs a message with level FATAL."""
        if self.isEnabledFor(FATAL_LEVEL_NUM):
            self._log(FATAL_LEVEL_NUM, message, args, **kws)


# Must run before any of our loggers are created.
logging.setLoggerClass(CustomLogger)


LOG_LEVEL_MAP = {
    'VERBOSE': VERBOSE_LEVEL_NUM,
    'DEBUG': logging.DEBUG,
    'INFO': logging.INFO,
    'WARNING': logging.WARNING,
    'ERROR': logging.ERROR,
    'CRITICAL': logging.CRITICAL,
    'FATAL': FATAL_LEVEL_NUM,
}

_IS_CONFIGURED = False
_listener = None


def default_log_file() -> Path:
    """Daily-rotated log file under the per-user log directory."""
    return platformdirs.user_log_path(APP_NAME, APP_AUTHOR) / "homlink.log"


def level_from_name(name: str) -> int:
    return LOG_LEVEL_MAP.get(name.upper(), logging.INFO)


class CustomFormatter(logging.Formatter):
    """Custom formatter with colors for the entire message body."""
    GREY = "\x1b[38;2m"
    CYAN = "\x1b[36m"
    GREEN = "\x1b[32m"
    YELLOW = "\x1b[33m"
    RED = "\x1b[31m"
    BOLD_RED = "\x1b[31;1m"
    BRIGHT_MAGENTA = "\x1b[35;1m"
    RESET = "\x1b[0m"

    log_format = "%(asctime)s - %(levelname)-8s - [%(name)s] - %(message)s"

    FORMATS = {
        VERBOSE_LEVEL_NUM: CYAN,
        logging.DEBUG: GREY,
        logging.INFO: GREEN,
        logging.WARNING: YELLOW,
        logging.ERROR: RED,
        logging.CRITICAL: BOLD_RED,
        FATAL_LEVEL_NUM: BRIGHT_MAGENTA,
    }

    def __init__(self, use_color: bool = True):
        super().__init__(self.log_format, datefmt="%Y-%m-%d %H:%M:%S")
        self.use_color = use_color

    def format(self, record):
        log_message = super().format(record)
        if not self.use_color:
            return log_message
        timestamp, separator, message_body = log_message.partition(' - ')
        log_color = self.FORMATS.get(record.levelno, self.RESET)
        return f"{timestamp}{separator}{log_color}{message_body}{self.RESET}"


def _shutdown_handler():
    """Gracefully stop the listener on program exit."""
    global _listener, _IS_CONFIGURED
    if _listener:
        _listener.stop()
        for handler in _listener.handlers:
            handler.close()
        _listener = None
    app_logger = logging.getLogger(APP_NAME)
    app_logger.handlers.clear()
    app_logger.propagate = True
    _IS_CONFIGURED = False


def setup_logger(level: int = logging.INFO, log_file: str | Path | None = None):
    """
    Sets up the decoupled, asynchronous logger for a command-line run.

    The console sink writes to stderr because stdout may carry CSV data.
    Pass ``log_file=None`` to skip the rotating file sink.
    """
    global _IS_CONFIGURED, _listener
    if _IS_CONFIGURED:
        return

    handlers = []
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(CustomFormatter(use_color=sys.stderr.isatty()))
    handlers.append(console_handler)

    file_error = None
    if log_file:
        log_path = Path(log_file)
        file_formatter = logging.Formatter(
            "%(asctime)s - %(levelname)-8s - [%(name)s] - %(message)s (%(filename)s:%(lineno)d)",
            datefmt="%Y-%m-%d %H:%M:%S"
        )
        try:
            log_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = TimedRotatingFileHandler(
                log_path, when='D', interval=1, backupCount=7, utc=True
            )
            file_handler.setFormatter(file_formatter)
            handlers.append(file_handler)
        except OSError as e:
            file_error = e

    log_queue = Queue(-1)
    _listener = QueueListener(log_queue, *handlers, respect_handler_level=False)
    _listener.start()

    app_logger = logging.getLogger(APP_NAME)
    app_logger.setLevel(level)

    if app_logger.hasHandlers():
        app_logger.handlers.clear()

    app_logger.addHandler(QueueHandler(log_queue))
    app_logger.propagate = False

    atexit.register(_shutdown_handler)
    _IS_CONFIGURED = True
    setup_log = get_logger("logger.setup")
    if file_error is not None:
        setup_log.warning(f"File logging disabled, cannot open {log_file}: {file_error}")
    setup_log.debug("Decoupled asynchronous logger configured.")


def shutdown_logger():
    """Flush and stop the queue listener (used when main() returns)."""
    _shutdown_handler()


def _get_namespaced_logger(prefix: str) -> CustomLogger:
    """Helper to create a logger name within our app's namespace."""
    return logging.getLogger(f"{APP_NAME}.{prefix}")


def get_logger(prefix=None) -> CustomLogger:
    """
    Returns a logger instance with a name automatically determined by the
    calling context.

    - If called from a class method, the name is the class name.
    - If called from a function, the name is the function name.
    - If called from the module level, the name is the module's name.
    """
    if prefix:
        return _get_namespaced_logger(prefix)
    frame = None
    try:
        frame = inspect.stack()[1].frame

        if 'self' in frame.f_locals:
            return _get_namespaced_logger(frame.f_locals['self'].__class__.__name__)

        if 'cls' in frame.f_locals:
            return _get_namespaced_logger(frame.f_locals['cls'].__name__)

        func_name = frame.f_code.co_name
        if func_name == '<module>':
            return _get_namespaced_logger(frame.f_globals['__name__'])

        return _get_namespaced_logger(func_name)

    finally:
        # Break the frame reference cycle.
        del frame
