"""Teaching service: accounts, groups, assignments, runs, submissions,
grading, progress reports, persistence, and the HTTP API."""

from .api import create_app
from .auth import ROLES, SessionManager, hash_password, verify_password
from .commands import ApiError, Commands
from .config import ServiceConfig, from_env
from .events import EventLog, StoreCorruptError, canonical_json
from .grading import grade
from .runner import Runner
from .seed import seed_demo
from .state import SUBMISSION_ORDER, apply_event, initial_state, replay
from .store import Store

__all__ = [
    "ApiError",
    "Commands",
    "EventLog",
    "ROLES",
    "Runner",
    "ServiceConfig",
    "SessionManager",
    "Store",
    "StoreCorruptError",
    "SUBMISSION_ORDER",
    "apply_event",
    "canonical_json",
    "create_app",
    "from_env",
    "grade",
    "hash_password",
    "initial_state",
    "replay",
    "seed_demo",
    "verify_password",
]
