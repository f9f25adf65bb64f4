"""Password hashing and in-memory session tokens.

Hash records carry their own salt and iteration count, so parameters can
change without invalidating stored credentials.  Sessions are deliberately
ephemeral: a restart logs everyone out, which is an acceptable cost for
keeping secrets out of the event log.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import threading
import time

HASH_ALGO = "pbkdf2_sha256"
DEFAULT_ITERATIONS = 60_000

ROLES = ("Administrator", "Teacher", "Student")


def hash_password(password: str, iterations: int = DEFAULT_ITERATIONS) -> dict:
    salt = secrets.token_hex(16)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"),
                                 bytes.fromhex(salt), iterations)
    return {"algo": HASH_ALGO, "salt": salt, "iterations": iterations,
            "hash": digest.hex()}


def verify_password(password: str, record: dict) -> bool:
    if record.get("algo") != HASH_ALGO:
        return False
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"),
                                 bytes.fromhex(record["salt"]),
                                 int(record["iterations"]))
    return hmac.compare_digest(digest.hex(), record["hash"])


class SessionManager:
    """Opaque bearer tokens with a fixed time-to-live."""

    def __init__(self, ttl_hours: float, clock=time.time):
        self._ttl = ttl_hours * 3600.0
        self._clock = clock
        self._lock = threading.Lock()
        self._sessions: dict[str, tuple[str, float]] = {}  # token -> (user, expiry)

    def create(self, user_id: str) -> str:
        token = secrets.token_urlsafe(32)
        with self._lock:
            self._sessions[token] = (user_id, self._clock() + self._ttl)
        return token

    def resolve(self, token: str) -> str | None:
        """User id for a live token, else None (expired tokens are dropped)."""
        with self._lock:
            entry = self._sessions.get(token)
            if entry is None:
                return None
            user_id, expiry = entry
            if self._clock() >= expiry:
                del self._sessions[token]
                return None
            return user_id

    def revoke_user(self, user_id: str) -> None:
        with self._lock:
            stale = [t for t, (uid, _) in self._sessions.items() if uid == user_id]
            for t in stale:
                del self._sessions[t]
