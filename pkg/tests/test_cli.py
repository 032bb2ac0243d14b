import json
import random
import socket
import subprocess
import sys
import time

import httpx
import pytest
from click.testing import CliRunner

from paperquarry.cli import EXIT_FATAL, EXIT_OK, EXIT_PARTIAL, main
from paperquarry.synth import article_pdf, make_ruled_table, ruled_table_pdf

from conftest import DEFAULT_SCHEMA


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="module")
def server(tmp_path_factory):
    """A real server subprocess plus a ready-to-use project."""
    root = tmp_path_factory.mktemp("srv")
    cfg = root / "server.cfg"
    cfg.write_text("# test server settings\n"
                   "scrypt_cost = 16\n"
                   "recent_list_len = 10\n")
    port = free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "paperquarry.cli", "serve",
         "--listen", f"127.0.0.1:{port}",
         "--data-dir", str(root / "data"),
         "--config", str(cfg)],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    base = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                if httpx.get(f"{base}/health", timeout=1.0).status_code == 200:
                    break
            except httpx.HTTPError:
                time.sleep(0.15)
        else:
            raise RuntimeError("server did not come up")

        httpx.post(f"{base}/auth/register",
                   json={"username": "cli", "password": "pw"})
        token = httpx.post(f"{base}/auth/login", json={
            "username": "cli", "password": "pw"}).json()["token"]
        auth = {"Authorization": f"Bearer {token}"}
        team = httpx.post(f"{base}/teams", json={"name": "crew"},
                          headers=auth).json()
        proj = httpx.post(f"{base}/projects", json={
            "team_id": team["team_id"], "name": "dig",
            "settings": {"schema": DEFAULT_SCHEMA},
        }, headers=auth).json()
        yield {"base": base, "port": port, "auth": auth,
               "project_id": proj["project_id"]}
    finally:
        proc.terminate()
        proc.wait(timeout=10)


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    """Two parseable PDFs and one byte-garbage file."""
    d = tmp_path_factory.mktemp("corpus")
    rng = random.Random(11)
    (d / "a_table.pdf").write_bytes(
        ruled_table_pdf(make_ruled_table(rng, rows=3, cols=3)))
    (d / "b_article.pdf").write_bytes(
        article_pdf("Moraine survey notes", ["C. Cartographer"],
                    ["Till thickness varies by slope."], year=2009))
    (d / "c_broken.pdf").write_bytes(b"%PDF-1.4 truncated garbage")
    (d / "ignored.txt").write_text("not a pdf, must be skipped")
    return d


def run(args, env=None):
    return CliRunner().invoke(main, args, env=env, catch_exceptions=False)


def import_args(server, directory, extra=()):
    return ["import", "--server", server["base"],
            "--project", server["project_id"], "--dir", str(directory),
            "--username", "cli", "--password", "pw", *extra]


def test_serve_health_and_config_file(server):
    # the subprocess came up under a key=value config file
    assert httpx.get(f"{server['base']}/health").json()["status"] == "ok"


def test_import_partial_failure_exit_code(server, corpus):
    res = run(import_args(server, corpus))
    assert res.exit_code == EXIT_PARTIAL
    lines = res.output.splitlines()
    assert any(l.startswith("a_table.pdf: ready") for l in lines)
    assert any(l.startswith("b_article.pdf: ready") for l in lines)
    assert any(l.startswith("c_broken.pdf: failed") and "could not be parsed" in l
               for l in lines)
    assert "ignored.txt" not in res.output


def test_import_json_report(server, corpus):
    res = run(import_args(server, corpus, ["--json"]))
    assert res.exit_code == EXIT_PARTIAL
    report = json.loads(res.output)
    assert report["total"] == 3
    assert report["imported"] == 2
    assert report["failed"] == 1
    by_name = {e["file"]: e for e in report["files"]}
    assert by_name["c_broken.pdf"]["status"] == "failed"


def test_import_clean_directory_parallel(server, corpus, tmp_path):
    clean = tmp_path / "clean"
    clean.mkdir()
    for name in ("a_table.pdf", "b_article.pdf"):
        (clean / name).write_bytes((corpus / name).read_bytes())
    res = run(import_args(server, clean, ["--jobs", "3"]))
    assert res.exit_code == EXIT_OK


def test_import_empty_directory(server, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    res = run(import_args(server, empty, ["--json"]))
    assert res.exit_code == EXIT_OK
    assert json.loads(res.output)["total"] == 0


def test_import_password_from_environment(server, tmp_path):
    empty = tmp_path / "envcase"
    empty.mkdir()
    res = run(["import", "--server", server["base"],
               "--project", server["project_id"], "--dir", str(empty),
               "--username", "cli"], env={"PAPERQUARRY_PASSWORD": "pw"})
    assert res.exit_code == EXIT_OK


def test_import_unknown_project_is_fatal(server, corpus):
    res = run(["import", "--server", server["base"], "--project", "p404",
               "--dir", str(corpus), "--username", "cli", "--password", "pw"])
    assert res.exit_code == EXIT_FATAL


def test_import_unreachable_server_is_fatal(corpus):
    res = run(["import", "--server", f"http://127.0.0.1:{free_port()}",
               "--project", "p", "--dir", str(corpus),
               "--username", "cli", "--password", "pw"])
    assert res.exit_code == EXIT_FATAL
    assert "cannot reach" in res.output


def test_export_writes_csv_and_sidecar_reproducibly(server, corpus, tmp_path):
    run(import_args(server, corpus))

    out1 = tmp_path / "one" / "data.csv"
    res = run(["export", "--server", server["base"],
               "--project", server["project_id"], "--out", str(out1),
               "--username", "cli", "--password", "pw"])
    assert res.exit_code == EXIT_OK
    sidecar1 = out1.parent / "data.csv.provenance.csv"
    assert out1.exists() and sidecar1.exists()
    header = out1.read_bytes().split(b"\r\n", 1)[0]
    assert header == b"site,count,longitude,latitude,species,year"

    out2 = tmp_path / "two" / "data.csv"
    res = run(["export", "--server", server["base"],
               "--project", server["project_id"], "--out", str(out2),
               "--username", "cli", "--password", "pw", "--json"])
    assert res.exit_code == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()
    sidecar2 = out2.parent / "data.csv.provenance.csv"
    assert sidecar1.read_bytes() == sidecar2.read_bytes()


def test_export_unknown_project_is_fatal(server, tmp_path):
    out = tmp_path / "never.csv"
    res = run(["export", "--server", server["base"], "--project", "p404",
               "--out", str(out), "--username", "cli", "--password", "pw"])
    assert res.exit_code == EXIT_FATAL
    assert not out.exists()


def test_register_command(server):
    res = run(["register", "--server", server["base"],
               "--username", "fresh", "--password", "pw"])
    assert res.exit_code == EXIT_OK
    assert "registered fresh" in res.output
    login = httpx.post(f"{server['base']}/auth/login",
                       json={"username": "fresh", "password": "pw"})
    assert login.status_code == 200


def test_serve_address_in_use_is_fatal(server, tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "paperquarry.cli", "serve",
         "--listen", f"127.0.0.1:{server['port']}",
         "--data-dir", str(tmp_path / "d2")],
        capture_output=True, text=True, timeout=60)
    assert res.returncode == EXIT_FATAL
    assert "cannot listen" in res.stderr


def test_serve_rejects_bad_config(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("lock_lease_secs = -5\n")
    res = subprocess.run(
        [sys.executable, "-m", "paperquarry.cli", "serve",
         "--listen", f"127.0.0.1:{free_port()}",
         "--data-dir", str(tmp_path / "d"), "--config", str(bad)],
        capture_output=True, text=True, timeout=60)
    assert res.returncode == EXIT_FATAL
    assert "positive" in res.stderr


def test_serve_rejects_unknown_config_key(tmp_path):
    bad = tmp_path / "bad2.cfg"
    bad.write_text("warp_speed = 9\n")
    res = subprocess.run(
        [sys.executable, "-m", "paperquarry.cli", "serve",
         "--listen", f"127.0.0.1:{free_port()}",
         "--data-dir", str(tmp_path / "d"), "--config", str(bad)],
        capture_output=True, text=True, timeout=60)
    assert res.returncode == EXIT_FATAL
    assert "warp_speed" in res.stderr


def test_serve_rejects_malformed_listen(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "paperquarry.cli", "serve",
         "--listen", "nonsense", "--data-dir", str(tmp_path / "d")],
        capture_output=True, text=True, timeout=60)
    assert res.returncode == EXIT_FATAL
    assert "host:port" in res.stderr
