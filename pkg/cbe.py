#!/usr/bin/env python3
"""
Contextual Bandit Environments
Command-line launcher; see `python cbe.py --help`
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
