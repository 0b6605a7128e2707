#!/usr/bin/env python3
"""
sykmonitor
Entry point for running sweeps from a source checkout.
"""

import os
import sys

# Add the current directory to Python path to import our modules
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

try:
    from sykmonitor.cli.main import main
except ImportError as e:
    print(f"Error importing modules: {e}")
    print("Please ensure you run this from the project root directory.")
    sys.exit(1)


if __name__ == "__main__":
    sys.exit(main())
