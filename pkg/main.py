#!/usr/bin/env python3
"""
Main entry point for the equical command line.
Imports the CLI from equical.cli.
"""

import sys

from equical.cli import main

# This allows running the tool with 'python main.py reproduce table1'
# The actual implementation is in equical/cli.py

if __name__ == "__main__":
    sys.exit(main())
