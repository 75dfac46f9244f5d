"""
Separable model patterns

Base class, metadata and decorator for patterns, plus the registry that
discovers the built-in ones by name.
"""

from .base import BasePattern, PatternMetadata, pattern
from .registry import PatternConflictError, PatternRegistry, get_pattern, get_registry

__all__ = [
    "BasePattern",
    "PatternMetadata",
    "pattern",
    "PatternRegistry",
    "PatternConflictError",
    "get_pattern",
    "get_registry",
]
