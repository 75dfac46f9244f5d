#!/usr/bin/env python3
"""
Main module for running expofit as a package.

This allows running the CLI with: python -m expofit_cli
"""

import sys

from .main import main

if __name__ == "__main__":
    sys.exit(main())
