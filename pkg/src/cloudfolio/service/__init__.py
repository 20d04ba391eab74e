"""REST service: accounts, catalog queries, CRUD with versioning, and
asynchronous allocation jobs over the optimizer library."""

from .api import create_app
from .config import ServiceConfig

__all__ = ["ServiceConfig", "create_app"]
