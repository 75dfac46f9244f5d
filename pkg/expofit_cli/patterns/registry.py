"""
Pattern registry

Discovers the built-in patterns, registers external pattern classes and hands
out instances by name.
"""

import importlib
import inspect
import logging
import pkgutil
import threading
from typing import Dict, List, Optional, Type

from ..core.errors import ExpofitError, PatternNotFoundError
from .base import BasePattern, PatternMetadata


class PatternConflictError(ExpofitError):
    """Raised when two pattern classes claim the same name"""

    pass


class PatternRegistry:
    """Name -> pattern class mapping with lazy discovery of the builtin package"""

    def __init__(self, packages: Optional[List[str]] = None):
        self.logger = logging.getLogger(__name__)
        self._patterns: Dict[str, Type[BasePattern]] = {}
        self._instances: Dict[str, BasePattern] = {}
        self._packages = packages or [f"{__package__}.builtin"]
        self._discovered = False
        self._lock = threading.RLock()

    def register(self, pattern_class: Type[BasePattern]) -> Type[BasePattern]:
        """Register a decorated pattern class; usable as a class decorator"""
        if not (inspect.isclass(pattern_class) and issubclass(pattern_class, BasePattern)):
            raise TypeError(f"{pattern_class!r} is not a BasePattern subclass")
        if inspect.isabstract(pattern_class):
            raise TypeError(f"{pattern_class.__name__} is abstract; decorate it with @pattern")

        name = pattern_class().metadata.name
        with self._lock:
            existing = self._patterns.get(name)
            if existing is not None and existing is not pattern_class:
                raise PatternConflictError(
                    f"pattern name conflict: {name} already provided by {existing.__name__}"
                )
            self._patterns[name] = pattern_class
            self._instances.pop(name, None)
        self.logger.debug("Registered pattern: %s", name)
        return pattern_class

    def discover(self) -> int:
        """Import every module of the configured packages and register their patterns"""
        found = 0
        with self._lock:
            for package_name in self._packages:
                package = importlib.import_module(package_name)
                for module_info in pkgutil.iter_modules(package.__path__):
                    if module_info.name.startswith("_"):
                        continue
                    module_name = f"{package_name}.{module_info.name}"
                    try:
                        module = importlib.import_module(module_name)
                    except ImportError as e:
                        self.logger.error("Failed to import pattern module %s: %s", module_name, e)
                        continue
                    for _, obj in inspect.getmembers(module, inspect.isclass):
                        if (
                            issubclass(obj, BasePattern)
                            and obj is not BasePattern
                            and not inspect.isabstract(obj)
                            and obj.__module__ == module.__name__
                        ):
                            self.register(obj)
                            found += 1
            self._discovered = True
        self.logger.debug("Discovered %d patterns", found)
        return found

    def _ensure_discovered(self) -> None:
        if not self._discovered:
            self.discover()

    def get(self, name: str) -> BasePattern:
        self._ensure_discovered()
        with self._lock:
            if name not in self._patterns:
                raise PatternNotFoundError(
                    f"unknown pattern {name!r}; available: {', '.join(sorted(self._patterns))}"
                )
            if name not in self._instances:
                self._instances[name] = self._patterns[name]()
            return self._instances[name]

    def names(self) -> List[str]:
        self._ensure_discovered()
        return sorted(self._patterns)

    def list_metadata(self) -> List[PatternMetadata]:
        return [self.get(name).metadata for name in self.names()]


_registry: Optional[PatternRegistry] = None


def get_registry() -> PatternRegistry:
    """Get the global pattern registry"""
    global _registry
    if _registry is None:
        _registry = PatternRegistry()
    return _registry


def get_pattern(name: str) -> BasePattern:
    return get_registry().get(name)
