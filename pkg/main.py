#!/usr/bin/env python3
"""
Coherence/Disturbance Complementarity Checker
Console entry point: logging setup, then dispatch to the subcommands in cli.py
"""

import logging
import sys

from config import LOG_LEVEL

# Configure logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=getattr(logging, LOG_LEVEL.upper(), logging.INFO)
)
logger = logging.getLogger(__name__)


def main():
    """Run one subcommand and return its exit status"""
    from cli import main as run_cli

    try:
        return run_cli(sys.argv[1:])
    except KeyboardInterrupt:
        logger.error("Interrupted")
        return 130


if __name__ == '__main__':
    sys.exit(main())
