"""
Service container for dependency injection.

Services are keyed by their class. An instance can be registered directly or built
lazily from a factory the first time it is requested.
"""
import os
import sys
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from typing import Any, Callable, Dict, Type, TypeVar
from utils.logger import get_logger

logger = get_logger(__name__)

S = TypeVar("S")


class ServiceContainer:
    """Container for service dependency injection."""

    def __init__(self):
        self._instances: Dict[type, Any] = {}
        self._factories: Dict[type, Callable[[], Any]] = {}
        logger.debug("ServiceContainer initialized")

    def register(self, service_type: Type[S], instance: S) -> None:
        self._instances[service_type] = instance
        logger.debug(f"Registered service: {service_type.__name__}")

    def register_factory(self, service_type: Type[S], factory: Callable[[], S]) -> None:
        """Defer construction until the first get()."""
        self._instances.pop(service_type, None)
        self._factories[service_type] = factory

    def get(self, service_type: Type[S]) -> S:
        """
        Registered instance of service_type.

        Raises:
            KeyError: If neither an instance nor a factory is registered
        """
        if service_type not in self._instances:
            if service_type not in self._factories:
                raise KeyError(f"Service not registered: {service_type.__name__}")
            self.register(service_type, self._factories.pop(service_type)())
        return self._instances[service_type]

    def get_or_create(self, service_type: Type[S], factory: Callable[[], S]) -> S:
        if not self.has(service_type):
            self.register_factory(service_type, factory)
        return self.get(service_type)

    def has(self, service_type: type) -> bool:
        return service_type in self._instances or service_type in self._factories

    def clear(self) -> None:
        self._instances.clear()
        self._factories.clear()


container = ServiceContainer()
