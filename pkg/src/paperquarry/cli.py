"""Command line entry points: serve the API, bulk-import a directory of
PDFs through it, and export a project's merged dataset.

Exit codes: 0 success, 1 partial success (some files failed), 2 fatal.
"""

from __future__ import annotations

import json
import pathlib
import socket
import sys
from concurrent.futures import ThreadPoolExecutor

import click
import httpx

from .config import ServiceConfig, load_config
from .errors import AddressInUse, BadConfig, QuarryError

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_FATAL = 2


def _load_service_config(config_path: str | None, **overrides) -> ServiceConfig:
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if config_path:
        return load_config(config_path, **overrides)
    cfg = ServiceConfig(**overrides) if overrides else ServiceConfig()
    cfg.validate()
    return cfg


def _split_listen(listen: str) -> tuple[str, int]:
    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise BadConfig(f"listen must be host:port, got {listen!r}")
    return host, int(port)


def _check_port_free(host: str, port: int) -> None:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise AddressInUse(f"cannot listen on {host}:{port}: {exc}") from exc
    finally:
        probe.close()


class ApiClient:
    """Small authenticated wrapper over the HTTP API."""

    def __init__(self, server: str, username: str, password: str):
        self.http = httpx.Client(base_url=server.rstrip("/"), timeout=60.0)
        resp = self.http.post("/auth/login", json={
            "username": username, "password": password})
        self._raise_for(resp)
        self.http.headers["Authorization"] = f"Bearer {resp.json()['token']}"

    @staticmethod
    def _raise_for(resp: httpx.Response) -> None:
        if resp.status_code < 400:
            return
        try:
            body = resp.json()
            err = QuarryError(body.get("message", resp.text),
                              **(body.get("details") or {}))
            err.code = body.get("code", "error")
        except (ValueError, KeyError):
            err = QuarryError(resp.text or f"HTTP {resp.status_code}")
        err.http_status = resp.status_code
        raise err

    def upload(self, project_id: str, path: pathlib.Path) -> dict:
        with path.open("rb") as fh:
            resp = self.http.post(
                f"/projects/{project_id}/files",
                files={"file": (path.name, fh, "application/pdf")})
        self._raise_for(resp)
        return resp.json()

    def export(self, project_id: str) -> dict:
        resp = self.http.post(f"/projects/{project_id}/integrate",
                              params={"include": "provenance"})
        self._raise_for(resp)
        return resp.json()


def _emit_report(report: dict, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(report, indent=2, sort_keys=True))
        return
    for entry in report.get("files", []):
        status = entry.get("status", "error")
        line = f"{entry['file']}: {status}"
        if entry.get("doc_id"):
            line += f" ({entry['doc_id']})"
        if entry.get("error"):
            line += f" - {entry['error']}"
        click.echo(line)
    for key, value in report.items():
        if key != "files":
            click.echo(f"{key}: {value}")


@click.group()
def main() -> None:
    """Collaborative extraction of datasets from scientific PDFs."""


@main.command()
@click.option("--listen", default=None, help="host:port to bind")
@click.option("--data-dir", default=None, help="directory for the database")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="key=value config file")
def serve(listen, data_dir, config_path):
    """Runs the HTTP API server."""
    import uvicorn

    from .service import Service, create_app
    from .service.store import Store

    try:
        cfg = _load_service_config(config_path, listen=listen,
                                   data_dir=data_dir)
        try:
            pathlib.Path(cfg.data_dir).mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise BadConfig(f"cannot create data dir {cfg.data_dir}: {exc}")
        cfg.require_data_dir()
        host, port = _split_listen(cfg.listen)
        _check_port_free(host, port)
        db_path = str(pathlib.Path(cfg.data_dir) / "paperquarry.sqlite3")
        service = Service(cfg, Store(db_path))
        service.purge_tombstones()
        app = create_app(service)
    except QuarryError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(EXIT_FATAL)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command(name="import")
@click.option("--server", default="http://127.0.0.1:8420", show_default=True)
@click.option("--project", required=True, help="target project id")
@click.option("--dir", "directory", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--jobs", default=1, show_default=True,
              help="parallel uploads")
@click.option("--username", required=True)
@click.option("--password", required=True, envvar="PAPERQUARRY_PASSWORD")
@click.option("--json", "as_json", is_flag=True, help="JSON report")
def import_cmd(server, project, directory, jobs, username, password, as_json):
    """Uploads every *.pdf in a directory; file errors are non-fatal."""
    try:
        client = ApiClient(server, username, password)
        client._raise_for(client.http.get(f"/projects/{project}"))
    except QuarryError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(EXIT_FATAL)
    except httpx.HTTPError as exc:
        click.echo(f"error: cannot reach {server}: {exc}", err=True)
        raise SystemExit(EXIT_FATAL)

    paths = sorted(pathlib.Path(directory).glob("*.pdf"))

    def upload_one(path: pathlib.Path) -> dict:
        try:
            doc = client.upload(project, path)
            entry = {"file": path.name, "doc_id": doc["doc_id"],
                     "status": doc["status"]}
            if doc["status"] != "ready":
                entry["error"] = "file could not be parsed"
            return entry
        except QuarryError as exc:
            return {"file": path.name, "status": "error", "error": str(exc)}
        except httpx.HTTPError as exc:
            return {"file": path.name, "status": "error",
                    "error": f"transport: {exc}"}

    if jobs > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(upload_one, paths))
    else:
        entries = [upload_one(p) for p in paths]

    failed = sum(1 for e in entries if e["status"] != "ready")
    report = {"files": entries, "total": len(entries),
              "imported": len(entries) - failed, "failed": failed}
    _emit_report(report, as_json)
    raise SystemExit(EXIT_PARTIAL if failed else EXIT_OK)


@main.command()
@click.option("--server", default="http://127.0.0.1:8420", show_default=True)
@click.option("--project", required=True, help="project id to export")
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="path of the CSV to write")
@click.option("--username", required=True)
@click.option("--password", required=True, envvar="PAPERQUARRY_PASSWORD")
@click.option("--json", "as_json", is_flag=True, help="JSON report")
def export(server, project, out, username, password, as_json):
    """Writes the merged project CSV plus its provenance sidecar."""
    try:
        client = ApiClient(server, username, password)
        result = client.export(project)
    except QuarryError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(EXIT_FATAL)
    except httpx.HTTPError as exc:
        click.echo(f"error: cannot reach {server}: {exc}", err=True)
        raise SystemExit(EXIT_FATAL)

    out_path = pathlib.Path(out)
    sidecar = out_path.with_suffix(out_path.suffix + ".provenance.csv")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(result["csv"], newline="")
    sidecar.write_text(result["provenance_csv"], newline="")
    report = {"out": str(out_path), "provenance": str(sidecar),
              "rows": max(0, result["csv"].count("\r\n") - 1),
              "warnings": result.get("warnings", [])}
    _emit_report(report, as_json)
    raise SystemExit(EXIT_OK)


@main.command()
@click.option("--server", default="http://127.0.0.1:8420", show_default=True)
@click.option("--username", required=True)
@click.option("--password", required=True, envvar="PAPERQUARRY_PASSWORD")
def register(server, username, password):
    """Creates a user account on a running server."""
    try:
        resp = httpx.post(f"{server.rstrip('/')}/auth/register",
                          json={"username": username, "password": password},
                          timeout=30.0)
        if resp.status_code >= 400:
            body = resp.json()
            click.echo(f"error: {body.get('message')}", err=True)
            raise SystemExit(EXIT_FATAL)
    except httpx.HTTPError as exc:
        click.echo(f"error: cannot reach {server}: {exc}", err=True)
        raise SystemExit(EXIT_FATAL)
    click.echo(f"registered {username}")


if __name__ == "__main__":
    main()
