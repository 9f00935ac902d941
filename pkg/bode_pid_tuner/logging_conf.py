import logging
import os
import sys

LOG_LEVEL_ENV = "BODE_PID_TUNER_LOG_LEVEL"


def configure_logging(name: str = "bode-pid-tuner") -> logging.Logger:
    """Configure and return a logger with standardized settings.

    The root level defaults to INFO and can be overridden with the
    ``BODE_PID_TUNER_LOG_LEVEL`` environment variable.

    Args:
        name: The name for the logger

    Returns:
        logging.Logger: Configured logger instance
    """
    level_name = os.environ.get(LOG_LEVEL_ENV, "INFO").upper()
    level = getattr(logging, level_name, logging.INFO)

    # Configure root logger; stdout stays reserved for JSON output
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stderr)
        ]
    )

    return logging.getLogger(name)


def set_level(level: int) -> None:
    """Change the level of every bode-pid-tuner logger at runtime."""
    logging.getLogger().setLevel(level)
