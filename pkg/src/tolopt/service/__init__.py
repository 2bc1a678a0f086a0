"""HTTP facade over the optimisation engine."""

from .app import create_app
from .store import EventStore

__all__ = ["create_app", "EventStore"]
