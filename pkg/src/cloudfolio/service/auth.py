"""Password hashing and bearer-token helpers.

Passwords are stored as salted PBKDF2-HMAC-SHA256 digests and compared in
constant time.  Tokens are opaque random strings; only their SHA-256
digest is persisted, so the session records on disk cannot be replayed.
"""

from __future__ import annotations

import hashlib
import hmac
import re
import secrets

__all__ = [
    "MIN_PASSWORD_LENGTH",
    "hash_password",
    "verify_password",
    "new_token",
    "token_digest",
    "valid_email",
]

MIN_PASSWORD_LENGTH = 8

_SCHEME = "pbkdf2_sha256"
_ITERATIONS = 120_000
_EMAIL_RE = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")


def valid_email(email: str) -> bool:
    return bool(_EMAIL_RE.fullmatch(email))


def hash_password(password: str) -> str:
    salt = secrets.token_bytes(16)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode(), salt, _ITERATIONS)
    return f"{_SCHEME}${_ITERATIONS}${salt.hex()}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, iterations_s, salt_hex, digest_hex = stored.split("$")
        iterations = int(iterations_s)
        salt = bytes.fromhex(salt_hex)
        expected = bytes.fromhex(digest_hex)
    except ValueError:
        return False
    if scheme != _SCHEME:
        return False
    candidate = hashlib.pbkdf2_hmac("sha256", password.encode(), salt, iterations)
    return hmac.compare_digest(candidate, expected)


def new_token() -> str:
    return secrets.token_urlsafe(32)


def token_digest(token: str) -> str:
    return hashlib.sha256(token.encode()).hexdigest()
