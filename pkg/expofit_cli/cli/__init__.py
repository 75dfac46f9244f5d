"""
Command-line interface for expofit.

Contains the Click command group and command definitions.
"""
