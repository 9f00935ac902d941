#!/usr/bin/env python
"""Launch the bode-pid-tuner MCP tool server from a source checkout.

Serves analyze_plant, tune_controller, simulate_step and compare_methods over
stdio without installing the package. Pass ``-v`` for debug logs on stderr.
"""
import argparse
import logging
import os
import sys
from pathlib import Path

# stdio carries the MCP protocol, so it must be unbuffered UTF-8
os.environ.setdefault("PYTHONIOENCODING", "utf-8")
os.environ.setdefault("PYTHONUNBUFFERED", "1")
sys.path.insert(0, str(Path(__file__).resolve().parent))

from bode_pid_tuner.logging_conf import configure_logging, set_level  # noqa: E402
from bode_pid_tuner.server import main  # noqa: E402

logger = configure_logging("bode-pid-tuner.runner")


def parse_args(argv=None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Run the bode-pid-tuner MCP server over stdio")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")
    return parser.parse_args(argv)


if __name__ == "__main__":
    args = parse_args()
    if args.verbose:
        set_level(logging.DEBUG)
    try:
        logger.info("Starting bode-pid-tuner MCP server from %s", Path(__file__).resolve().parent)
        main()
    except Exception as e:
        logger.error("Fatal error in MCP server: %s", e, exc_info=True)
        sys.exit(1)
