#!/usr/bin/env python3
"""
stabkit - Application Entry Point

Runs the command-line interface: scans, certificates, hyper certificates,
sharpness searches, audits, demos and the JSON API server.
"""

import os
import sys

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

from src.cli import run


def main() -> int:
    """Run stabkit with the process arguments.

    Environment Variables:
        STABKIT_SEED: Fallback seed for randomized searches. Defaults to 0.
        STABKIT_DATABASE_URL: Ledger database URL. Defaults to 'sqlite:///stabkit.db'.
        STABKIT_LOG_LEVEL: Logging level on stderr. Defaults to 'WARNING'.
        STABKIT_JOBS: Worker processes for scans. Defaults to 1.

    Returns:
        int: The exit code (0 success, 1 failed check, 2 usage error).
    """
    return run(sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
