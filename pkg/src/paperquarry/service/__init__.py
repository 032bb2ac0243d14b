"""Multi-user collaboration service: accounts, teams, projects,
documents, locks, principals, and the HTTP API over them."""

from .api import create_app
from .core import ACTIONS, PERMISSION_MATRIX, ROLES, Service, check_permission
from .store import Store

__all__ = [
    "ACTIONS",
    "PERMISSION_MATRIX",
    "ROLES",
    "Service",
    "Store",
    "check_permission",
    "create_app",
]
