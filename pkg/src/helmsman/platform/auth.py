"""User authentication with roles.

Credentials live in a JSON file (username, salted PBKDF2 hash, role);
plaintext passwords are never stored. The file emulates the immutable
credentials store: writes require an explicit unlock by an
administrator, and the file is kept read-only on disk between writes.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import logging
import os
import secrets
import stat
import tempfile
import threading
from pathlib import Path

logger = logging.getLogger(__name__)

ADMINISTRATOR = "administrator"
OPERATOR = "operator"
ROLES = (ADMINISTRATOR, OPERATOR)

_ROLE_RANK = {OPERATOR: 1, ADMINISTRATOR: 2}

DEFAULT_ITERATIONS = 60_000


class PlatformError(Exception):
    pass


class BadCredentials(PlatformError):
    def __init__(self):
        # uniform message: unknown user and wrong password are indistinguishable
        super().__init__("bad credentials")


class Forbidden(PlatformError):
    pass


class StoreLocked(PlatformError):
    pass


class StoreUnavailable(PlatformError):
    pass


def hash_password(password: str, salt_hex: str, iterations: int) -> str:
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"),
                                 bytes.fromhex(salt_hex), iterations)
    return digest.hex()


def make_user_entry(username: str, password: str, role: str,
                    iterations: int = DEFAULT_ITERATIONS) -> dict:
    if role not in ROLES:
        raise ValueError(f"unknown role {role!r}")
    salt = secrets.token_hex(16)
    return {"username": username, "salt": salt,
            "hash": hash_password(password, salt, iterations), "role": role}


def role_rank(role: str | None) -> int:
    return _ROLE_RANK.get(role, 0)


class AuthService:
    def __init__(self, users_path: str | Path, iterations: int = DEFAULT_ITERATIONS):
        self._path = Path(users_path)
        self._iterations = iterations
        self._lock = threading.Lock()
        self._users: dict[str, dict] = {}
        self._tokens: dict[str, dict] = {}
        self._unlocked = False
        self._load_error: str | None = None
        self._dummy = make_user_entry("__dummy__", secrets.token_hex(8), OPERATOR,
                                      iterations)
        self._load()

    @classmethod
    def seed_file(cls, path: str | Path, entries: list[tuple[str, str, str]],
                  iterations: int = DEFAULT_ITERATIONS) -> None:
        """Write a fresh credentials file (fixtures, first boot)."""
        doc = {"iterations": iterations,
               "users": [make_user_entry(u, p, r, iterations)
                         for u, p, r in entries]}
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        _set_read_only(path, True)

    def _load(self) -> None:
        try:
            doc = json.loads(self._path.read_text(encoding="utf-8"))
            self._iterations = int(doc.get("iterations", self._iterations))
            self._users = {u["username"]: u for u in doc["users"]}
            self._load_error = None
        except (OSError, ValueError, KeyError, TypeError) as exc:
            self._users = {}
            self._load_error = str(exc)

    # -- login / tokens ---------------------------------------------------

    def login(self, username: str, password: str) -> dict:
        with self._lock:
            if self._load_error is not None:
                raise StoreUnavailable(self._load_error)
            entry = self._users.get(username, self._dummy)
            expected = entry["hash"]
            computed = hash_password(password, entry["salt"], self._iterations)
            ok = hmac.compare_digest(computed, expected) and username in self._users
            if not ok:
                raise BadCredentials()
            token = secrets.token_hex(16)
            self._tokens[token] = {"username": username, "role": entry["role"]}
            return {"token": token, "role": entry["role"], "username": username}

    def logout(self, token: str) -> bool:
        with self._lock:
            return self._tokens.pop(token, None) is not None

    def role_of(self, token: str | None) -> str | None:
        if token is None:
            return None
        with self._lock:
            session = self._tokens.get(token)
            return session["role"] if session else None

    def require_role(self, token: str | None, required: str) -> str:
        role = self.role_of(token)
        if role_rank(role) < role_rank(required):
            raise Forbidden(f"requires role {required}")
        return role

    # -- user management -----------------------------------------------------

    def unlock_store(self, admin_token: str) -> None:
        self.require_role(admin_token, ADMINISTRATOR)
        with self._lock:
            self._unlocked = True
        _set_read_only(self._path, False)

    def lock_store(self, admin_token: str) -> None:
        self.require_role(admin_token, ADMINISTRATOR)
        with self._lock:
            self._unlocked = False
        _set_read_only(self._path, True)

    def upsert_user(self, admin_token: str, username: str, password: str,
                    role: str) -> None:
        self.require_role(admin_token, ADMINISTRATOR)
        with self._lock:
            if not self._unlocked:
                raise StoreLocked("credentials store is immutable; unlock first")
            if self._load_error is not None:
                raise StoreUnavailable(self._load_error)
            self._users[username] = make_user_entry(username, password, role,
                                                    self._iterations)
            self._save_locked()

    def _save_locked(self) -> None:
        doc = {"iterations": self._iterations, "users": list(self._users.values())}
        data = json.dumps(doc, indent=2) + "\n"
        _atomic_write(self._path, data.encode("utf-8"))

    def usernames(self) -> list[str]:
        with self._lock:
            return sorted(self._users)

    # -- bus wiring ---------------------------------------------------------

    def attach(self, bus, node: str = "platform_auth") -> None:
        bus.register_node(node)
        bus.register_service(node, "/ui/login", self._svc_login)
        bus.register_service(node, "/ui/logout",
                             lambda req: {"ok": self.logout(req.get("token"))})

    def _svc_login(self, req):
        return self.login(req.get("username", ""), req.get("password", ""))


def _set_read_only(path: Path, read_only: bool) -> None:
    try:
        mode = stat.S_IRUSR | stat.S_IRGRP | stat.S_IROTH
        if not read_only:
            mode |= stat.S_IWUSR
        os.chmod(path, mode)
    except OSError:
        logger.debug("chmod on %s skipped", path)


def _atomic_write(path: Path, data: bytes) -> None:
    """Temp file + rename so a fault never corrupts the previous version."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
