"""Bearer-token sessions. Tokens are 128-bit random, URL-safe."""
from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass
from typing import Optional


@dataclass
class Session:
    token: str
    user_id: str
    expires_at: int


class SessionStore:
    def __init__(self, ttl_ms: int = 7 * 24 * 3600 * 1000):
        self.ttl_ms = ttl_ms
        self._by_token: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, user_id: str) -> Session:
        token = secrets.token_urlsafe(16)  # 128 bits
        session = Session(token=token, user_id=user_id, expires_at=int(time.time() * 1000) + self.ttl_ms)
        with self._lock:
            self._by_token[token] = session
        return session

    def resolve(self, token: str) -> Optional[Session]:
        with self._lock:
            session = self._by_token.get(token)
            if session is None:
                return None
            if session.expires_at <= int(time.time() * 1000):
                del self._by_token[token]
                return None
            return session
