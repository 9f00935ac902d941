"""PID auto-tuning for delayed plants from Bode-integral slope estimates."""

__version__ = "0.1.0"
