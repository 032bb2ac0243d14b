"""Business logic of the collaboration service.

One Service instance owns the store and implements accounts, teams and
the role matrix, projects, document ingestion, locking, principals,
search, and the per-document extraction state (tables, annotations, map,
summaries).  All methods raise QuarryError subclasses; the HTTP layer
translates them into JSON error bodies.
"""

from __future__ import annotations

import hashlib
import hmac
import os
import re
import secrets
import time
import uuid
from datetime import datetime, timezone

from ..annotate import (
    LabelDef,
    add_manual_annotation,
    auto_annotate,
    compile_labelset,
    export_annotations_csv,
    list_annotations,
)
from ..annotate import Annotation
from ..config import ServiceConfig
from ..errors import (
    AlreadyAssigned,
    DuplicateUsername,
    EncryptedPdf,
    InvalidCredentials,
    InvalidSortKey,
    LockHeldByOther,
    LockNotHeld,
    MalformedPdf,
    NoHeaders,
    NotFound,
    NotPrincipal,
    PageOutOfRange,
    PermissionDenied,
)
from ..geomap import GeoPoint, MapCalibration, calibrate, detect_ticks, locate_point
from ..integrate import (
    ProjectSchema,
    SummaryTable,
    export_csv,
    export_provenance_csv,
    integrate_file,
    integrate_project,
)
from ..meta import extract_meta
from ..model import (
    DocumentRecord,
    MetaInfo,
    PageContent,
    Region,
)
from ..pdfread import parse_pdf
from ..tables.artifact import TableArtifact, advance_stage, apply_edit
from ..tables.recognize import detect_table_regions
from .store import Store, dump_json, load_json

__all__ = ["ACTIONS", "ROLES", "PERMISSION_MATRIX", "Service",
           "check_permission"]

ACTIONS = ("AddRemoveManager", "AddRemoveMember", "AddDeleteProject",
           "ImportFile", "ProjectSettings")
ROLES = ("Owner", "Manager", "Member")

PERMISSION_MATRIX = {
    "Owner": {action: True for action in ACTIONS},
    "Manager": {action: action != "AddRemoveManager" for action in ACTIONS},
    "Member": {action: action == "ImportFile" for action in ACTIONS},
}

TOMBSTONE_DAYS = 30.0

_TOKEN_RE = re.compile(r"[a-z0-9]+")

_SORT_KEYS = {
    "title": "title",
    "import_time": "import_time",
    "import time": "import_time",
    "update_time": "update_time",
    "latest update time": "update_time",
}


def check_permission(role: str | None, action: str) -> bool:
    """Pure matrix lookup; unknown roles (non-members) always deny."""
    if action not in ACTIONS:
        raise NotFound(f"unknown action {action!r}")
    if role not in PERMISSION_MATRIX:
        return False
    return PERMISSION_MATRIX[role][action]


def _rfc3339(epoch: float) -> str:
    dt = datetime.fromtimestamp(epoch, timezone.utc)
    return dt.isoformat(timespec="seconds").replace("+00:00", "Z")


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall((text or "").casefold())


def _new_id(prefix: str) -> str:
    return prefix + uuid.uuid4().hex[:12]


class Service:
    def __init__(self, config: ServiceConfig | None = None,
                 store: Store | None = None, clock=time.time):
        self.cfg = config or ServiceConfig()
        self.store = store or Store(":memory:")
        self.clock = clock

    # ------------------------------------------------------------------ auth

    def _hash_password(self, password: str) -> str:
        salt = os.urandom(16)
        n = self.cfg.scrypt_cost
        digest = hashlib.scrypt(password.encode("utf-8"), salt=salt,
                                n=n, r=8, p=1)
        return f"scrypt${n}${salt.hex()}${digest.hex()}"

    @staticmethod
    def _verify_password(password: str, stored: str) -> bool:
        try:
            _, n, salt_hex, digest_hex = stored.split("$")
            digest = hashlib.scrypt(password.encode("utf-8"),
                                    salt=bytes.fromhex(salt_hex),
                                    n=int(n), r=8, p=1)
            return hmac.compare_digest(digest.hex(), digest_hex)
        except (ValueError, TypeError):
            return False

    def register(self, username: str, password: str) -> dict:
        username = (username or "").strip()
        if not username or not password:
            raise InvalidCredentials("username and password required")
        user_id = _new_id("u")
        now = self.clock()
        with self.store.tx() as con:
            row = con.execute("SELECT 1 FROM users WHERE username = ?",
                              (username,)).fetchone()
            if row:
                raise DuplicateUsername(f"username {username!r} is taken")
            con.execute(
                "INSERT INTO users (user_id, username, digest, created_at) "
                "VALUES (?, ?, ?, ?)",
                (user_id, username, self._hash_password(password),
                 _rfc3339(now)))
        return {"user_id": user_id, "username": username,
                "created_at": _rfc3339(now)}

    def login(self, username: str, password: str) -> dict:
        now = self.clock()
        with self.store.tx() as con:
            row = con.execute(
                "SELECT user_id, digest FROM users WHERE username = ?",
                ((username or "").strip(),)).fetchone()
            if row is None or not self._verify_password(password, row["digest"]):
                raise InvalidCredentials("unknown username or wrong password")
            token = secrets.token_hex(16)
            con.execute(
                "INSERT INTO sessions (token, user_id, created_at, expires_at) "
                "VALUES (?, ?, ?, ?)",
                (token, row["user_id"], _rfc3339(now),
                 now + self.cfg.session_ttl_secs))
        return {"token": token, "user_id": row["user_id"],
                "expires_at": _rfc3339(now + self.cfg.session_ttl_secs)}

    def authenticate(self, token: str) -> str:
        """User id for a live session token."""
        with self.store.tx() as con:
            row = con.execute(
                "SELECT user_id, expires_at FROM sessions WHERE token = ?",
                (token or "",)).fetchone()
        if row is None or row["expires_at"] < self.clock():
            raise InvalidCredentials("missing or expired session")
        return row["user_id"]

    def _user_row(self, con, user_id: str):
        row = con.execute("SELECT * FROM users WHERE user_id = ?",
                          (user_id,)).fetchone()
        if row is None:
            raise NotFound(f"no user {user_id!r}")
        return row

    # ----------------------------------------------------------------- teams

    def _role_in(self, con, team_id: str, user_id: str) -> str | None:
        row = con.execute(
            "SELECT role FROM memberships WHERE team_id = ? AND user_id = ?",
            (team_id, user_id)).fetchone()
        return row["role"] if row else None

    def _require_permission(self, con, team_id: str, user_id: str,
                            action: str) -> None:
        role = self._role_in(con, team_id, user_id)
        if not check_permission(role, action):
            raise PermissionDenied(
                f"role {role or 'non-member'} may not {action}",
                action=action, role=role)

    def _require_member(self, con, team_id: str, user_id: str) -> str:
        role = self._role_in(con, team_id, user_id)
        if role is None:
            raise PermissionDenied("not a member of this team")
        return role

    def create_team(self, caller: str, name: str) -> dict:
        team_id = _new_id("tm")
        now = _rfc3339(self.clock())
        with self.store.tx() as con:
            self._user_row(con, caller)
            con.execute(
                "INSERT INTO teams (team_id, name, created_at) VALUES (?, ?, ?)",
                (team_id, (name or "team").strip() or "team", now))
            con.execute(
                "INSERT INTO memberships (team_id, user_id, role) VALUES (?, ?, ?)",
                (team_id, caller, "Owner"))
        return self.get_team(caller, team_id)

    def get_team(self, caller: str, team_id: str) -> dict:
        with self.store.tx() as con:
            team = con.execute("SELECT * FROM teams WHERE team_id = ?",
                               (team_id,)).fetchone()
            if team is None:
                raise NotFound(f"no team {team_id!r}")
            self._require_member(con, team_id, caller)
            members = con.execute(
                "SELECT m.user_id, m.role, u.username FROM memberships m "
                "JOIN users u ON u.user_id = m.user_id WHERE m.team_id = ? "
                "ORDER BY u.username", (team_id,)).fetchall()
        return {
            "team_id": team["team_id"], "name": team["name"],
            "created_at": team["created_at"],
            "members": [{"user_id": m["user_id"], "username": m["username"],
                         "role": m["role"]} for m in members],
        }

    def list_teams(self, caller: str) -> list[dict]:
        with self.store.tx() as con:
            rows = con.execute(
                "SELECT t.team_id FROM teams t JOIN memberships m "
                "ON m.team_id = t.team_id WHERE m.user_id = ? "
                "ORDER BY t.created_at", (caller,)).fetchall()
        return [self.get_team(caller, r["team_id"]) for r in rows]

    def add_member(self, caller: str, team_id: str, username: str,
                   role: str = "Member") -> dict:
        if role not in ROLES:
            raise NotFound(f"unknown role {role!r}")
        if role == "Owner":
            raise PermissionDenied("a team has exactly one owner")
        action = "AddRemoveManager" if role == "Manager" else "AddRemoveMember"
        with self.store.tx() as con:
            if con.execute("SELECT 1 FROM teams WHERE team_id = ?",
                           (team_id,)).fetchone() is None:
                raise NotFound(f"no team {team_id!r}")
            self._require_permission(con, team_id, caller, action)
            user = con.execute("SELECT user_id FROM users WHERE username = ?",
                               (username,)).fetchone()
            if user is None:
                raise NotFound(f"no user named {username!r}")
            if self._role_in(con, team_id, user["user_id"]) is not None:
                raise AlreadyAssigned(f"{username!r} is already a member")
            con.execute(
                "INSERT INTO memberships (team_id, user_id, role) VALUES (?, ?, ?)",
                (team_id, user["user_id"], role))
        return self.get_team(caller, team_id)

    def set_role(self, caller: str, team_id: str, user_id: str,
                 role: str) -> dict:
        """Changes a member's role; Owner cannot be created or demoted."""
        if role not in ROLES:
            raise NotFound(f"unknown role {role!r}")
        if role == "Owner":
            raise PermissionDenied("a team has exactly one owner")
        with self.store.tx() as con:
            current = self._role_in(con, team_id, user_id)
            if current is None:
                raise NotFound(f"user {user_id!r} is not a member")
            if current == "Owner":
                raise PermissionDenied("the owner role cannot be changed")
            action = ("AddRemoveManager"
                      if "Manager" in (current, role) else "AddRemoveMember")
            self._require_permission(con, team_id, caller, action)
            con.execute(
                "UPDATE memberships SET role = ? WHERE team_id = ? AND user_id = ?",
                (role, team_id, user_id))
        return self.get_team(caller, team_id)

    def remove_member(self, caller: str, team_id: str, user_id: str) -> dict:
        """Removes a member; their past artifacts and log entries persist."""
        with self.store.tx() as con:
            current = self._role_in(con, team_id, user_id)
            if current is None:
                raise NotFound(f"user {user_id!r} is not a member")
            if current == "Owner":
                raise PermissionDenied("the owner cannot be removed")
            action = ("AddRemoveManager" if current == "Manager"
                      else "AddRemoveMember")
            self._require_permission(con, team_id, caller, action)
            con.execute(
                "DELETE FROM memberships WHERE team_id = ? AND user_id = ?",
                (team_id, user_id))
        return self.get_team(caller, team_id)

    # -------------------------------------------------------------- projects

    def _project_row(self, con, project_id: str, include_deleted: bool = False):
        row = con.execute("SELECT * FROM projects WHERE project_id = ?",
                          (project_id,)).fetchone()
        if row is None or (row["deleted_at"] is not None and not include_deleted):
            raise NotFound(f"no project {project_id!r}")
        return row

    @staticmethod
    def _project_wire(con, row) -> dict:
        n = con.execute(
            "SELECT COUNT(*) AS n FROM documents "
            "WHERE project_id = ? AND deleted_at IS NULL",
            (row["project_id"],)).fetchone()["n"]
        return {
            "project_id": row["project_id"], "team_id": row["team_id"],
            "name": row["name"], "settings": load_json(row["settings"]),
            "created_by": row["created_by"], "created_at": row["created_at"],
            "file_count": n,
        }

    def create_project(self, caller: str, team_id: str, name: str,
                       settings: dict | None = None) -> dict:
        project_id = _new_id("p")
        now = _rfc3339(self.clock())
        stored = {"description": "", "labels": [], "schema": None}
        stored.update(settings or {})
        self._validate_settings(stored)
        with self.store.tx() as con:
            if con.execute("SELECT 1 FROM teams WHERE team_id = ?",
                           (team_id,)).fetchone() is None:
                raise NotFound(f"no team {team_id!r}")
            self._require_permission(con, team_id, caller, "AddDeleteProject")
            con.execute(
                "INSERT INTO projects (project_id, team_id, name, settings, "
                "created_by, created_at) VALUES (?, ?, ?, ?, ?, ?)",
                (project_id, team_id, (name or "project").strip() or "project",
                 dump_json(stored), caller, now))
            row = self._project_row(con, project_id)
            return self._project_wire(con, row)

    def delete_project(self, caller: str, project_id: str) -> None:
        now = _rfc3339(self.clock())
        with self.store.tx() as con:
            row = self._project_row(con, project_id)
            self._require_permission(con, row["team_id"], caller,
                                     "AddDeleteProject")
            con.execute("UPDATE projects SET deleted_at = ? WHERE project_id = ?",
                        (now, project_id))
            con.execute(
                "UPDATE documents SET deleted_at = ? "
                "WHERE project_id = ? AND deleted_at IS NULL",
                (now, project_id))

    def purge_tombstones(self) -> int:
        """Hard-deletes projects and documents tombstoned for 30+ days."""
        cutoff = _rfc3339(self.clock() - TOMBSTONE_DAYS * 86400.0)
        removed = 0
        with self.store.tx() as con:
            old_docs = con.execute(
                "SELECT doc_id FROM documents WHERE deleted_at IS NOT NULL "
                "AND deleted_at < ?", (cutoff,)).fetchall()
            for row in old_docs:
                con.execute("DELETE FROM artifacts WHERE doc_id = ?",
                            (row["doc_id"],))
                con.execute("DELETE FROM locks WHERE doc_id = ?",
                            (row["doc_id"],))
                con.execute("DELETE FROM views WHERE doc_id = ?",
                            (row["doc_id"],))
                con.execute("DELETE FROM documents WHERE doc_id = ?",
                            (row["doc_id"],))
                removed += 1
            removed += con.execute(
                "DELETE FROM projects WHERE deleted_at IS NOT NULL "
                "AND deleted_at < ?", (cutoff,)).rowcount
        return removed

    def list_projects(self, caller: str) -> list[dict]:
        with self.store.tx() as con:
            rows = con.execute(
                "SELECT p.* FROM projects p JOIN memberships m "
                "ON m.team_id = p.team_id WHERE m.user_id = ? "
                "AND p.deleted_at IS NULL ORDER BY p.created_at",
                (caller,)).fetchall()
            return [self._project_wire(con, r) for r in rows]

    def get_project(self, caller: str, project_id: str) -> dict:
        with self.store.tx() as con:
            row = self._project_row(con, project_id)
            self._require_member(con, row["team_id"], caller)
            return self._project_wire(con, row)

    @staticmethod
    def _validate_settings(settings: dict) -> None:
        labels = settings.get("labels") or []
        compile_labelset(LabelDef.from_json(l) for l in labels)
        schema = settings.get("schema")
        if schema is not None:
            ProjectSchema.from_json(schema)

    def update_project_settings(self, caller: str, project_id: str,
                                changes: dict) -> dict:
        with self.store.tx() as con:
            row = self._project_row(con, project_id)
            self._require_permission(con, row["team_id"], caller,
                                     "ProjectSettings")
            settings = load_json(row["settings"])
            for key in ("description", "labels", "schema"):
                if key in changes:
                    settings[key] = changes[key]
            self._validate_settings(settings)
            con.execute("UPDATE projects SET settings = ? WHERE project_id = ?",
                        (dump_json(settings), project_id))
            return self._project_wire(con, self._project_row(con, project_id))

    # ------------------------------------------------------------- documents

    @staticmethod
    def _doc_wire(row) -> dict:
        return {
            "doc_id": row["doc_id"], "project_id": row["project_id"],
            "filename": row["filename"], "status": row["status"],
            "page_count": row["page_count"], "meta": load_json(row["meta"]),
            "import_user": row["import_user"], "import_time": row["import_time"],
            "last_editor": row["last_editor"],
            "last_edit_time": row["last_edit_time"],
            "principal": row["principal"],
            "principal_since": row["principal_since"],
        }

    def _doc_row(self, con, doc_id: str):
        row = con.execute("SELECT * FROM documents WHERE doc_id = ?",
                          (doc_id,)).fetchone()
        if row is None or row["deleted_at"] is not None:
            raise NotFound(f"no document {doc_id!r}")
        return row

    def _doc_team(self, con, row) -> str:
        project = self._project_row(con, row["project_id"],
                                    include_deleted=True)
        return project["team_id"]

    def _require_doc_member(self, con, doc_id: str, caller: str):
        row = self._doc_row(con, doc_id)
        self._require_member(con, self._doc_team(con, row), caller)
        return row

    def import_file(self, caller: str, project_id: str, filename: str,
                    raw: bytes) -> dict:
        """Ingests one PDF; identical content re-imported into the same
        project returns the existing record."""
        doc_id = "d" + hashlib.sha256(
            project_id.encode() + b"\x00" + raw).hexdigest()[:15]
        now = _rfc3339(self.clock())
        status = "ready"
        pages: list[PageContent] = []
        meta = MetaInfo()
        try:
            pages = parse_pdf(raw, self.cfg.pipeline)
            meta = extract_meta(raw, pages, self.cfg.meta_adapters)
        except (MalformedPdf, EncryptedPdf):
            status = "failed"
            pages = []
            meta = MetaInfo()
        with self.store.tx() as con:
            project = self._project_row(con, project_id)
            self._require_permission(con, project["team_id"], caller,
                                     "ImportFile")
            existing = con.execute(
                "SELECT * FROM documents WHERE doc_id = ? AND deleted_at IS NULL",
                (doc_id,)).fetchone()
            if existing is not None:
                return self._doc_wire(existing)
            con.execute(
                "INSERT INTO documents (doc_id, project_id, filename, status, "
                "meta, pages, page_count, raw, import_user, import_time) "
                "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (doc_id, project_id, filename or "document.pdf", status,
                 dump_json(meta.to_json()),
                 dump_json([p.to_json() for p in pages]), len(pages), raw,
                 caller, now))
            row = self._doc_row(con, doc_id)
        return self._doc_wire(row)

    def _touch_doc(self, con, doc_id: str, caller: str) -> None:
        con.execute(
            "UPDATE documents SET last_editor = ?, last_edit_time = ? "
            "WHERE doc_id = ?",
            (caller, _rfc3339(self.clock()), doc_id))

    def _record_view(self, con, caller: str, doc_id: str) -> None:
        con.execute(
            "INSERT INTO views (user_id, doc_id, viewed_at) VALUES (?, ?, ?) "
            "ON CONFLICT (user_id, doc_id) DO UPDATE SET viewed_at = excluded.viewed_at",
            (caller, doc_id, self.clock()))

    def get_document(self, caller: str, doc_id: str) -> dict:
        with self.store.tx() as con:
            row = self._require_doc_member(con, doc_id, caller)
            self._record_view(con, caller, doc_id)
            wire = self._doc_wire(row)
            lock = con.execute("SELECT * FROM locks WHERE doc_id = ?",
                               (doc_id,)).fetchone()
            if lock is not None and lock["lease_expiry"] > self.clock():
                wire["lock"] = {"holder": lock["holder"],
                                "acquired_at": lock["acquired_at"],
                                "lease_expiry": _rfc3339(lock["lease_expiry"])}
            else:
                wire["lock"] = None
        return wire

    def get_page(self, caller: str, doc_id: str, page_index: int) -> dict:
        with self.store.tx() as con:
            row = self._require_doc_member(con, doc_id, caller)
            pages = load_json(row["pages"])
            if not 0 <= page_index < len(pages):
                raise PageOutOfRange(
                    f"page {page_index} outside 0..{len(pages) - 1}")
            self._record_view(con, caller, doc_id)
            return pages[page_index]

    def _load_pages(self, row) -> list[PageContent]:
        return [PageContent.from_json(p) for p in load_json(row["pages"])]

    def get_meta(self, caller: str, doc_id: str) -> dict:
        return self.get_document(caller, doc_id)

    def put_meta(self, caller: str, doc_id: str, meta: dict) -> dict:
        cleaned = MetaInfo.from_json(meta)
        with self.store.tx() as con:
            self._require_doc_member(con, doc_id, caller)
            self._require_live_lock(con, doc_id, caller)
            con.execute("UPDATE documents SET meta = ? WHERE doc_id = ?",
                        (dump_json(cleaned.to_json()), doc_id))
            self._touch_doc(con, doc_id, caller)
            row = self._doc_row(con, doc_id)
        return self._doc_wire(row)

    # ----------------------------------------------------- search and lists

    def search_documents(self, caller: str, project_id: str,
                         query: str = "", principal: str | None = None,
                         import_user: str | None = None,
                         sort: str = "import_time", order: str = "desc",
                         page: int = 1, page_size: int = 50) -> dict:
        """Paged, filtered, sorted documents of one project."""
        key = _SORT_KEYS.get((sort or "import_time").strip().casefold())
        if key is None:
            raise InvalidSortKey(
                f"sort must be one of title, import_time, update_time; got {sort!r}")
        if order not in ("asc", "desc"):
            raise InvalidSortKey(f"order must be asc or desc, got {order!r}")
        with self.store.tx() as con:
            project = self._project_row(con, project_id)
            self._require_member(con, project["team_id"], caller)
            rows = con.execute(
                "SELECT * FROM documents WHERE project_id = ? "
                "AND deleted_at IS NULL", (project_id,)).fetchall()
        docs = [self._doc_wire(r) for r in rows]
        if principal:
            docs = [d for d in docs if d["principal"] == principal]
        if import_user:
            docs = [d for d in docs if d["import_user"] == import_user]
        terms = _tokens(query or "")
        if terms:
            index: dict[str, set[str]] = {}
            for d in docs:
                meta = d["meta"]
                text = " ".join([
                    meta.get("title") or "",
                    " ".join(meta.get("authors") or []),
                    meta.get("abstract") or "", meta.get("venue") or "",
                    str(meta.get("year") or ""),
                ])
                for tok in _tokens(text):
                    index.setdefault(tok, set()).add(d["doc_id"])
            hit: set[str] | None = None
            for term in terms:
                found = index.get(term, set())
                hit = found if hit is None else hit & found
            docs = [d for d in docs if d["doc_id"] in (hit or set())]

        def sort_value(d):
            if key == "title":
                return (d["meta"].get("title") or "").casefold()
            if key == "update_time":
                return d["last_edit_time"] or d["import_time"]
            return d["import_time"]

        docs.sort(key=lambda d: (sort_value(d), d["doc_id"]),
                  reverse=(order == "desc"))
        total = len(docs)
        page = max(1, int(page))
        page_size = max(1, min(200, int(page_size)))
        start = (page - 1) * page_size
        return {"items": docs[start:start + page_size], "total": total,
                "page": page, "page_size": page_size}

    def my_files(self, caller: str) -> list[dict]:
        """Documents the caller has taken charge of, across all teams."""
        with self.store.tx() as con:
            rows = con.execute(
                "SELECT * FROM documents WHERE principal = ? "
                "AND deleted_at IS NULL ORDER BY import_time DESC, doc_id",
                (caller,)).fetchall()
        return [self._doc_wire(r) for r in rows]

    def recent_files(self, caller: str) -> list[dict]:
        """Most recently viewed documents, deduplicated, newest first."""
        with self.store.tx() as con:
            rows = con.execute(
                "SELECT d.* FROM views v JOIN documents d ON d.doc_id = v.doc_id "
                "WHERE v.user_id = ? AND d.deleted_at IS NULL "
                "ORDER BY v.viewed_at DESC LIMIT ?",
                (caller, self.cfg.recent_list_len)).fetchall()
        return [self._doc_wire(r) for r in rows]

    # ----------------------------------------------------------------- locks

    def _live_lock(self, con, doc_id: str):
        row = con.execute("SELECT * FROM locks WHERE doc_id = ?",
                          (doc_id,)).fetchone()
        if row is None or row["lease_expiry"] <= self.clock():
            return None
        return row

    def _require_live_lock(self, con, doc_id: str, caller: str) -> None:
        # principal dominance: even a live lock from before the
        # assignment does not let a non-principal mutate
        doc = self._doc_row(con, doc_id)
        if doc["principal"] is not None and doc["principal"] != caller:
            raise NotPrincipal(
                f"document is in the charge of {doc['principal']!r}")
        row = self._live_lock(con, doc_id)
        if row is None or row["holder"] != caller:
            raise LockNotHeld("mutation requires a live lock held by the caller")

    def acquire_lock(self, caller: str, doc_id: str) -> dict:
        """Atomic check-and-set; re-acquiring as the holder renews the
        lease (heartbeat)."""
        now = self.clock()
        with self.store.tx() as con:
            doc = self._require_doc_member(con, doc_id, caller)
            if doc["principal"] is not None and doc["principal"] != caller:
                raise NotPrincipal(
                    f"document is in the charge of {doc['principal']!r}")
            live = self._live_lock(con, doc_id)
            if live is not None and live["holder"] != caller:
                raise LockHeldByOther(
                    f"lock held by {live['holder']!r}",
                    holder=live["holder"],
                    lease_expiry=_rfc3339(live["lease_expiry"]))
            expiry = now + self.cfg.lock_lease_secs
            acquired = (live["acquired_at"] if live is not None
                        else _rfc3339(now))
            con.execute(
                "INSERT INTO locks (doc_id, holder, acquired_at, lease_expiry) "
                "VALUES (?, ?, ?, ?) ON CONFLICT (doc_id) DO UPDATE SET "
                "holder = excluded.holder, acquired_at = excluded.acquired_at, "
                "lease_expiry = excluded.lease_expiry",
                (doc_id, caller, acquired, expiry))
        return {"doc_id": doc_id, "holder": caller, "acquired_at": acquired,
                "lease_expiry": _rfc3339(expiry)}

    def release_lock(self, caller: str, doc_id: str) -> None:
        with self.store.tx() as con:
            self._require_doc_member(con, doc_id, caller)
            live = self._live_lock(con, doc_id)
            if live is None or live["holder"] != caller:
                raise LockNotHeld("no live lock held by the caller")
            con.execute("DELETE FROM locks WHERE doc_id = ?", (doc_id,))

    # ------------------------------------------------------------ principals

    def take_charge(self, caller: str, doc_id: str) -> dict:
        now = _rfc3339(self.clock())
        with self.store.tx() as con:
            doc = self._require_doc_member(con, doc_id, caller)
            if doc["principal"] is not None:
                raise AlreadyAssigned(
                    f"document already in the charge of {doc['principal']!r}",
                    principal=doc["principal"])
            con.execute(
                "UPDATE documents SET principal = ?, principal_since = ? "
                "WHERE doc_id = ?", (caller, now, doc_id))
        return {"doc_id": doc_id, "principal": caller, "since": now}

    def release_charge(self, caller: str, doc_id: str) -> None:
        """The principal may release their own assignment; an Owner or
        Manager of the team may force-release anyone's."""
        with self.store.tx() as con:
            doc = self._doc_row(con, doc_id)
            role = self._require_member(con, self._doc_team(con, doc), caller)
            if doc["principal"] is None:
                raise NotPrincipal("document has no principal")
            if doc["principal"] != caller and role not in ("Owner", "Manager"):
                raise NotPrincipal(
                    "only the principal or a team manager may release")
            con.execute(
                "UPDATE documents SET principal = NULL, principal_since = NULL "
                "WHERE doc_id = ?", (doc_id,))

    # -------------------------------------------------------- doc artifacts

    def _artifact_rows(self, con, doc_id: str, kind: str):
        return con.execute(
            "SELECT * FROM artifacts WHERE doc_id = ? AND kind = ? "
            "ORDER BY art_id", (doc_id, kind)).fetchall()

    def _artifact_get(self, con, doc_id: str, kind: str, art_id: str):
        return con.execute(
            "SELECT * FROM artifacts WHERE doc_id = ? AND kind = ? AND art_id = ?",
            (doc_id, kind, art_id)).fetchone()

    def _artifact_put(self, con, doc_id: str, kind: str, art_id: str,
                      payload: dict) -> int:
        existing = self._artifact_get(con, doc_id, kind, art_id)
        version = (existing["version"] + 1) if existing is not None else 1
        con.execute(
            "INSERT INTO artifacts (doc_id, kind, art_id, version, payload, "
            "updated_at) VALUES (?, ?, ?, ?, ?, ?) "
            "ON CONFLICT (doc_id, kind, art_id) DO UPDATE SET "
            "version = excluded.version, payload = excluded.payload, "
            "updated_at = excluded.updated_at",
            (doc_id, kind, art_id, version, dump_json(payload),
             _rfc3339(self.clock())))
        return version

    @staticmethod
    def _table_wire(row) -> dict:
        payload = load_json(row["payload"])
        payload["version"] = row["version"]
        payload["updated_at"] = row["updated_at"]
        return payload

    def list_tables(self, caller: str, doc_id: str) -> list[dict]:
        with self.store.tx() as con:
            self._require_doc_member(con, doc_id, caller)
            rows = self._artifact_rows(con, doc_id, "table")
        return [self._table_wire(r) for r in rows]

    def create_table(self, caller: str, doc_id: str, page_index: int,
                     bbox: list | None = None) -> list[dict]:
        """Starts table extraction: with a bbox, one user-drawn located
        artifact; without, one per detected region on the page."""
        with self.store.tx() as con:
            row = self._require_doc_member(con, doc_id, caller)
            self._require_live_lock(con, doc_id, caller)
            pages = self._load_pages(row)
            if not 0 <= page_index < len(pages):
                raise PageOutOfRange(f"page {page_index} outside document")
            if bbox is not None:
                regions = [Region(page_index,
                                  tuple(float(v) for v in bbox), "user_drawn")]
            else:
                regions = detect_table_regions(pages[page_index],
                                               self.cfg.pipeline)
            n_before = len(self._artifact_rows(con, doc_id, "table"))
            created = []
            for offset, region in enumerate(regions):
                table_id = f"{doc_id}-t{n_before + offset + 1:03d}"
                art = TableArtifact(table_id, doc_id, region)
                self._artifact_put(con, doc_id, "table", art.table_id,
                                   art.to_json())
                created.append(self._table_wire(
                    self._artifact_get(con, doc_id, "table", art.table_id)))
            self._touch_doc(con, doc_id, caller)
        return created

    def _find_table(self, con, table_id: str):
        row = con.execute(
            "SELECT * FROM artifacts WHERE kind = 'table' AND art_id = ?",
            (table_id,)).fetchone()
        if row is None:
            raise NotFound(f"no table {table_id!r}")
        return row

    def _table_mutation(self, caller: str, table_id: str, fn) -> dict:
        with self.store.tx() as con:
            row = self._find_table(con, table_id)
            doc = self._require_doc_member(con, row["doc_id"], caller)
            self._require_live_lock(con, row["doc_id"], caller)
            art = TableArtifact.from_json(load_json(row["payload"]))
            pages = self._load_pages(doc)
            art = fn(art, pages)
            self._artifact_put(con, row["doc_id"], "table", table_id,
                               art.to_json())
            self._touch_doc(con, row["doc_id"], caller)
            return self._table_wire(
                self._artifact_get(con, row["doc_id"], "table", table_id))

    def stage_table(self, caller: str, table_id: str, to_stage: str) -> dict:
        def fn(art: TableArtifact, pages):
            idx = art.region.page_index
            if not 0 <= idx < len(pages):
                raise PageOutOfRange(f"page {idx} outside document")
            ocr = self.cfg.ocr_adapters[0] if self.cfg.ocr_adapters else None
            return advance_stage(art, to_stage, pages[idx], self.cfg.pipeline,
                                 user=caller, ts=self.clock(), ocr=ocr)
        return self._table_mutation(caller, table_id, fn)

    def edit_table(self, caller: str, table_id: str, op: str,
                   params: dict) -> dict:
        def fn(art: TableArtifact, pages):
            return apply_edit(art, op, params, user=caller, ts=self.clock())
        return self._table_mutation(caller, table_id, fn)

    # ----------------------------------------------------------- annotations

    def _labelset(self, con, project_id: str):
        project = self._project_row(con, project_id, include_deleted=True)
        settings = load_json(project["settings"])
        labels = [LabelDef.from_json(l) for l in settings.get("labels") or []]
        return compile_labelset(labels)

    def _doc_record(self, row) -> DocumentRecord:
        return DocumentRecord(
            doc_id=row["doc_id"], project_id=row["project_id"],
            page_count=row["page_count"], pages=self._load_pages(row),
            meta=MetaInfo.from_json(load_json(row["meta"])),
            import_user=row["import_user"], import_time=row["import_time"],
            last_editor=row["last_editor"],
            last_edit_time=row["last_edit_time"],
            principal=row["principal"], status=row["status"])

    def _stored_annotations(self, con, doc_id: str) -> list[Annotation]:
        row = self._artifact_get(con, doc_id, "annotations", "default")
        if row is None:
            return []
        return [Annotation.from_json(a)
                for a in load_json(row["payload"])["items"]]

    def get_annotations(self, caller: str, doc_id: str,
                        include_hidden: bool = False) -> list[dict]:
        with self.store.tx() as con:
            row = self._require_doc_member(con, doc_id, caller)
            compiled = self._labelset(con, row["project_id"])
            anns = self._stored_annotations(con, doc_id)
        return [a.to_json()
                for a in list_annotations(anns, compiled, include_hidden)]

    def annotate(self, caller: str, doc_id: str, body: dict) -> list[dict]:
        """POST body: {"op": "auto"} re-tags the document; {"op": "manual",
        "page_index": n, "char_span": [s, e], "label_id": id} places one
        annotation by hand."""
        op = body.get("op")
        now = _rfc3339(self.clock())
        with self.store.tx() as con:
            row = self._require_doc_member(con, doc_id, caller)
            self._require_live_lock(con, doc_id, caller)
            compiled = self._labelset(con, row["project_id"])
            existing = self._stored_annotations(con, doc_id)
            doc = self._doc_record(row)
            if op == "auto":
                anns = auto_annotate(doc, compiled, existing, created_at=now)
            elif op == "manual":
                anns = add_manual_annotation(
                    doc, int(body["page_index"]),
                    tuple(int(v) for v in body["char_span"]),
                    str(body["label_id"]), caller, compiled, existing,
                    created_at=now)
            else:
                raise NotFound(f"unknown annotation op {op!r}")
            self._artifact_put(con, doc_id, "annotations", "default",
                               {"items": [a.to_json() for a in anns]})
            self._touch_doc(con, doc_id, caller)
        return [a.to_json() for a in anns]

    # ------------------------------------------------------------------- map

    def _stored_map(self, con, doc_id: str) -> dict:
        row = self._artifact_get(con, doc_id, "map", "default")
        if row is None:
            return {"calibration": None, "points": []}
        return load_json(row["payload"])

    def get_map(self, caller: str, doc_id: str) -> dict:
        with self.store.tx() as con:
            self._require_doc_member(con, doc_id, caller)
            return self._stored_map(con, doc_id)

    def calibrate_map(self, caller: str, doc_id: str, page_index: int,
                      bbox: list) -> dict:
        with self.store.tx() as con:
            row = self._require_doc_member(con, doc_id, caller)
            self._require_live_lock(con, doc_id, caller)
            pages = self._load_pages(row)
            if not 0 <= page_index < len(pages):
                raise PageOutOfRange(f"page {page_index} outside document")
            region = Region(page_index, tuple(float(v) for v in bbox),
                            "user_drawn")
            ticks = detect_ticks(pages[page_index], region, self.cfg.pipeline)
            cal = calibrate(region, ticks)
            state = self._stored_map(con, doc_id)
            state["calibration"] = cal.to_json()
            self._artifact_put(con, doc_id, "map", "default", state)
            self._touch_doc(con, doc_id, caller)
        return state

    def add_map_point(self, caller: str, doc_id: str, pixel: list,
                      table_row_hint: int | None = None) -> dict:
        now = _rfc3339(self.clock())
        with self.store.tx() as con:
            self._require_doc_member(con, doc_id, caller)
            self._require_live_lock(con, doc_id, caller)
            state = self._stored_map(con, doc_id)
            if state["calibration"] is None:
                raise NotFound("map is not calibrated yet")
            cal = MapCalibration.from_json(state["calibration"])
            point = locate_point(
                cal, tuple(float(v) for v in pixel), doc_id=doc_id,
                table_row_hint=table_row_hint, created_by=caller,
                created_at=now)
            state["points"].append(point.to_json())
            self._artifact_put(con, doc_id, "map", "default", state)
            self._touch_doc(con, doc_id, caller)
        return state

    # ------------------------------------------------------------- integrate

    def _schema(self, con, project_id: str) -> ProjectSchema:
        project = self._project_row(con, project_id, include_deleted=True)
        settings = load_json(project["settings"])
        schema = settings.get("schema")
        if not schema:
            raise NoHeaders(
                "project has no export schema; set headers in project settings")
        return ProjectSchema.from_json(schema)

    def _file_summary(self, con, row) -> tuple[SummaryTable, list[str]]:
        schema = self._schema(con, row["project_id"])
        doc = self._doc_record(row)
        artifacts = [
            TableArtifact.from_json(load_json(r["payload"]))
            for r in self._artifact_rows(con, row["doc_id"], "table")
        ]
        anns = self._stored_annotations(con, row["doc_id"])
        state = self._stored_map(con, row["doc_id"])
        points = [GeoPoint.from_json(p) for p in state["points"]]
        return integrate_file(doc, artifacts, schema,
                              meta=doc.meta, annotations=anns,
                              geo_points=points)

    def integrate_document(self, caller: str, doc_id: str) -> dict:
        """Computes and stores the file-level summary table."""
        with self.store.tx() as con:
            row = self._require_doc_member(con, doc_id, caller)
            self._require_live_lock(con, doc_id, caller)
            table, warnings = self._file_summary(con, row)
            payload = {"table": table.to_json(), "warnings": warnings}
            self._artifact_put(con, doc_id, "summary", "default", payload)
            self._touch_doc(con, doc_id, caller)
        return payload

    def integrate_project_csv(self, caller: str, project_id: str) -> dict:
        """Recomputes every file summary and stacks them; read-only."""
        with self.store.tx() as con:
            project = self._project_row(con, project_id)
            self._require_member(con, project["team_id"], caller)
            schema = self._schema(con, project_id)
            # doc ids hash the file content, so this order is stable
            # across re-imports regardless of upload timing
            rows = con.execute(
                "SELECT * FROM documents WHERE project_id = ? "
                "AND deleted_at IS NULL ORDER BY doc_id",
                (project_id,)).fetchall()
            tables = []
            warnings: list[str] = []
            for row in rows:
                if row["status"] != "ready":
                    warnings.append(f"document {row['doc_id']}: skipped "
                                    f"(status {row['status']})")
                    continue
                table, warn = self._file_summary(con, row)
                tables.append(table)
                warnings.extend(warn)
            project_table = integrate_project(tables, schema)
        return {
            "csv": export_csv(project_table),
            "provenance_csv": export_provenance_csv(project_table),
            "table": project_table.to_json(),
            "warnings": warnings,
        }

    def export_annotations(self, caller: str, doc_id: str) -> str:
        with self.store.tx() as con:
            self._require_doc_member(con, doc_id, caller)
            anns = self._stored_annotations(con, doc_id)
        return export_annotations_csv(anns)
