"""
Test suite for expofit.

Contains unit tests, integration tests, and test utilities.
"""
