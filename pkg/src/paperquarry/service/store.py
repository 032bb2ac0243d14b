"""SQLite persistence for the collaboration service.

A single connection in WAL mode guarded by one re-entrant lock: every
read and write happens inside ``with store.tx():``, which serializes
access and commits on clean exit.  That makes multi-step check-and-set
sequences (lock acquisition, role changes) atomic with respect to other
threads of this process, which is the deployment unit here.
"""

from __future__ import annotations

import json
import os
import sqlite3
import threading
from contextlib import contextmanager

_SCHEMA = """
CREATE TABLE IF NOT EXISTS users (
    user_id     TEXT PRIMARY KEY,
    username    TEXT NOT NULL UNIQUE,
    digest      TEXT NOT NULL,
    created_at  TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
    token       TEXT PRIMARY KEY,
    user_id     TEXT NOT NULL,
    created_at  TEXT NOT NULL,
    expires_at  REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS teams (
    team_id     TEXT PRIMARY KEY,
    name        TEXT NOT NULL,
    created_at  TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS memberships (
    team_id     TEXT NOT NULL,
    user_id     TEXT NOT NULL,
    role        TEXT NOT NULL,
    PRIMARY KEY (team_id, user_id)
);
CREATE TABLE IF NOT EXISTS projects (
    project_id  TEXT PRIMARY KEY,
    team_id     TEXT NOT NULL,
    name        TEXT NOT NULL,
    settings    TEXT NOT NULL,
    created_by  TEXT NOT NULL,
    created_at  TEXT NOT NULL,
    deleted_at  TEXT
);
CREATE TABLE IF NOT EXISTS documents (
    doc_id          TEXT PRIMARY KEY,
    project_id      TEXT NOT NULL,
    filename        TEXT NOT NULL,
    status          TEXT NOT NULL,
    meta            TEXT NOT NULL,
    pages           TEXT NOT NULL,
    page_count      INTEGER NOT NULL,
    raw             BLOB,
    import_user     TEXT NOT NULL,
    import_time     TEXT NOT NULL,
    last_editor     TEXT,
    last_edit_time  TEXT,
    principal       TEXT,
    principal_since TEXT,
    deleted_at      TEXT
);
CREATE TABLE IF NOT EXISTS artifacts (
    doc_id      TEXT NOT NULL,
    kind        TEXT NOT NULL,
    art_id      TEXT NOT NULL,
    version     INTEGER NOT NULL,
    payload     TEXT NOT NULL,
    updated_at  TEXT NOT NULL,
    PRIMARY KEY (doc_id, kind, art_id)
);
CREATE TABLE IF NOT EXISTS locks (
    doc_id       TEXT PRIMARY KEY,
    holder       TEXT NOT NULL,
    acquired_at  TEXT NOT NULL,
    lease_expiry REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS views (
    user_id    TEXT NOT NULL,
    doc_id     TEXT NOT NULL,
    viewed_at  REAL NOT NULL,
    PRIMARY KEY (user_id, doc_id)
);
"""


class Store:
    def __init__(self, path: str):
        self.path = path
        if path != ":memory:":
            os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        self._con = sqlite3.connect(path, check_same_thread=False)
        self._con.row_factory = sqlite3.Row
        self._lock = threading.RLock()
        with self.tx() as con:
            con.execute("PRAGMA journal_mode=WAL")
            con.executescript(_SCHEMA)

    @contextmanager
    def tx(self):
        """Serialized access; commits on success, rolls back on error."""
        with self._lock:
            try:
                yield self._con
                self._con.commit()
            except BaseException:
                self._con.rollback()
                raise

    def close(self) -> None:
        with self._lock:
            self._con.close()


def dump_json(value) -> str:
    return json.dumps(value, sort_keys=True, ensure_ascii=False)


def load_json(text: str):
    return json.loads(text)
