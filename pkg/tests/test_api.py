import random

import pytest

from paperquarry.synth import article_pdf, make_ruled_table, ruled_table_pdf

from conftest import make_workspace, register_login


def upload(client, headers, project_id, name, raw):
    return client.post(f"/projects/{project_id}/files",
                       files={"file": (name, raw, "application/pdf")},
                       headers=headers)


@pytest.fixture
def workspace(client):
    """Owner account, a team/project, and one imported ruled-table doc."""
    token, headers = register_login(client, "owner")
    team_id, project_id = make_workspace(client, headers)
    rng = random.Random(7)
    table = make_ruled_table(rng, rows=3, cols=2)
    raw = ruled_table_pdf(table)
    resp = upload(client, headers, project_id, "t.pdf", raw)
    assert resp.status_code == 201, resp.text
    doc_id = resp.json()["doc_id"]
    return {"headers": headers, "team_id": team_id, "project_id": project_id,
            "doc_id": doc_id, "table": table, "raw": raw}


# --- envelope ---------------------------------------------------------------

def test_health(client):
    assert client.get("/health").json()["status"] == "ok"


def test_missing_token_is_401(client):
    resp = client.get("/me/files")
    assert resp.status_code == 401
    body = resp.json()
    assert set(body) == {"code", "message", "details"}
    assert body["code"] == "invalid_credentials"


def test_garbage_token_is_401(client):
    resp = client.get("/me/files", headers={"Authorization": "Bearer nope"})
    assert resp.status_code == 401


def test_not_found_error_shape(client, workspace):
    resp = client.get("/files/d000000000000000/meta",
                      headers=workspace["headers"])
    assert resp.status_code == 404
    body = resp.json()
    assert body["code"] == "not_found"
    assert isinstance(body["message"], str)
    assert isinstance(body["details"], dict)


def test_malformed_request_is_400_validation_error(client):
    resp = client.post("/auth/register")          # body missing entirely
    assert resp.status_code == 400
    assert resp.json()["code"] == "validation_error"
    assert resp.json()["details"]["errors"]


def test_duplicate_registration_is_409(client):
    client.post("/auth/register", json={"username": "kim", "password": "pw"})
    resp = client.post("/auth/register",
                       json={"username": "kim", "password": "pw"})
    assert resp.status_code == 409
    assert resp.json()["code"] == "duplicate_username"


# --- documents --------------------------------------------------------------

def test_reimport_same_bytes_is_idempotent(client, workspace):
    again = upload(client, workspace["headers"], workspace["project_id"],
                   "renamed.pdf", workspace["raw"])
    assert again.json()["doc_id"] == workspace["doc_id"]


def test_corrupt_upload_keeps_failed_record(client, workspace):
    resp = upload(client, workspace["headers"], workspace["project_id"],
                  "junk.pdf", b"this is not a pdf at all")
    assert resp.status_code == 201
    body = resp.json()
    assert body["status"] == "failed"
    doc = client.get(f"/files/{body['doc_id']}/meta",
                     headers=workspace["headers"])
    assert doc.json()["status"] == "failed"


def test_page_fetch_and_range(client, workspace):
    h, did = workspace["headers"], workspace["doc_id"]
    page = client.get(f"/files/{did}/pages/0", headers=h)
    assert page.status_code == 200
    assert page.json()["text_boxes"]
    assert client.get(f"/files/{did}/pages/99", headers=h).status_code == 404


def test_search_endpoint_passthrough(client, workspace):
    h, pid = workspace["headers"], workspace["project_id"]
    resp = client.get(f"/projects/{pid}/files",
                      params={"sort": "title", "order": "asc"}, headers=h)
    assert resp.status_code == 200
    assert resp.json()["total"] == 1
    resp = client.get(f"/projects/{pid}/files",
                      params={"sort": "nonsense"}, headers=h)
    assert resp.status_code == 400
    assert resp.json()["code"] == "invalid_sort_key"


# --- membership walls -------------------------------------------------------

def test_outsider_sees_nothing(client, workspace):
    _, other = register_login(client, "outsider")
    did, pid = workspace["doc_id"], workspace["project_id"]
    assert client.get(f"/files/{did}/meta", headers=other).status_code == 403
    assert client.get(f"/projects/{pid}", headers=other).status_code == 403
    assert client.get(f"/projects/{pid}/files", headers=other).status_code == 403
    assert client.post(f"/files/{did}/lock", headers=other).status_code == 403
    resp = upload(client, other, pid, "x.pdf", b"%PDF-1.4")
    assert resp.status_code == 403


def test_member_role_gates_project_creation(client, workspace):
    _, member = register_login(client, "helper")
    client.post(f"/teams/{workspace['team_id']}/members",
                json={"username": "helper", "role": "Member"},
                headers=workspace["headers"])
    resp = client.post("/projects", json={
        "team_id": workspace["team_id"], "name": "side", "settings": {},
    }, headers=member)
    assert resp.status_code == 403
    assert resp.json()["code"] == "permission_denied"


# --- the lock wall ----------------------------------------------------------

MUTATIONS = [
    ("PUT", "/files/{doc}/meta", {"title": "x", "authors": [], "year": None,
                                  "abstract": "", "venue": ""}),
    ("POST", "/files/{doc}/tables", {"page_index": 0}),
    ("POST", "/tables/{table}/stage", {"to": "structured"}),
    ("POST", "/tables/{table}/edits", {"op": "set_region",
                                       "params": {"bbox": [0, 0, 50, 50]}}),
    ("POST", "/files/{doc}/annotations", {"op": "auto"}),
    ("POST", "/files/{doc}/map/calibrate", {"page_index": 0,
                                            "bbox": [0, 0, 100, 100]}),
    ("POST", "/files/{doc}/map/points", {"pixel": [10, 10]}),
    ("POST", "/files/{doc}/integrate", {}),
]


@pytest.mark.parametrize("method,path,body", MUTATIONS,
                         ids=[m[1] for m in MUTATIONS])
def test_every_mutation_requires_live_lock(client, workspace, method,
                                           path, body):
    h, did = workspace["headers"], workspace["doc_id"]
    client.post(f"/files/{did}/lock", headers=h)
    table_id = client.post(f"/files/{did}/tables", json={"page_index": 0},
                           headers=h).json()[0]["table_id"]
    client.delete(f"/files/{did}/lock", headers=h)

    url = path.format(doc=did, table=table_id)
    resp = client.request(method, url, json=body, headers=h)
    assert resp.status_code == 409, f"{method} {url}: {resp.text}"
    assert resp.json()["code"] == "lock_not_held"


def test_lock_endpoint_lifecycle(client, workspace):
    h, did = workspace["headers"], workspace["doc_id"]
    _, rival = register_login(client, "rival")
    client.post(f"/teams/{workspace['team_id']}/members",
                json={"username": "rival", "role": "Member"}, headers=h)

    assert client.post(f"/files/{did}/lock", headers=h).status_code == 201
    contested = client.post(f"/files/{did}/lock", headers=rival)
    assert contested.status_code == 409
    assert contested.json()["code"] == "lock_held_by_other"
    assert "holder" in contested.json()["details"]
    assert client.delete(f"/files/{did}/lock", headers=h).status_code == 204
    assert client.post(f"/files/{did}/lock", headers=rival).status_code == 201


def test_principal_dominance_over_http(client, workspace):
    h, did = workspace["headers"], workspace["doc_id"]
    _, helper = register_login(client, "helper")
    client.post(f"/teams/{workspace['team_id']}/members",
                json={"username": "helper", "role": "Member"}, headers=h)

    assert client.post(f"/files/{did}/charge", headers=helper).status_code == 201
    blocked = client.post(f"/files/{did}/lock", headers=h)
    assert blocked.status_code == 403
    assert blocked.json()["code"] == "not_principal"

    # owner may force-release the assignment, helper's own release also works
    assert client.delete(f"/files/{did}/charge", headers=h).status_code == 204
    assert client.post(f"/files/{did}/lock", headers=h).status_code == 201


# --- extraction round trip --------------------------------------------------

def test_table_flow_over_http(client, workspace):
    h, did, truth = workspace["headers"], workspace["doc_id"], workspace["table"]
    client.post(f"/files/{did}/lock", headers=h)
    created = client.post(f"/files/{did}/tables", json={"page_index": 0},
                          headers=h).json()
    assert len(created) == 1
    tid = created[0]["table_id"]
    assert created[0]["stage"] == "located"

    for to in ("structured", "filled"):
        resp = client.post(f"/tables/{tid}/stage", json={"to": to}, headers=h)
        assert resp.status_code == 200, resp.text
    grid = resp.json()["grid"]
    got = {(s["row0"], s["col0"]): s["content"] for s in grid["spans"]}
    assert got == truth.cells

    resp = client.post(f"/tables/{tid}/edits", json={
        "op": "set_cell", "params": {"row": 0, "col": 0, "content": "fixed"},
    }, headers=h)
    assert resp.status_code == 200
    client.post(f"/tables/{tid}/stage", json={"to": "confirmed"}, headers=h)
    locked = client.post(f"/tables/{tid}/edits", json={
        "op": "set_cell", "params": {"row": 0, "col": 0, "content": "nope"},
    }, headers=h)
    assert locked.status_code == 400
    assert locked.json()["code"] == "invalid_transition"

    listing = client.get(f"/files/{did}/tables", headers=h).json()
    assert [t["table_id"] for t in listing] == [tid]
    assert listing[0]["stage"] == "confirmed"


def test_annotation_flow_over_http(client, workspace):
    h, pid = workspace["headers"], workspace["project_id"]
    raw = article_pdf("Conifer stands", ["B. Botanist"],
                      ["Abies dominates the north slope.",
                       "Picea fills the valleys."], year=2012)
    did = upload(client, h, pid, "conifer.pdf", raw).json()["doc_id"]
    client.post(f"/files/{did}/lock", headers=h)
    made = client.post(f"/files/{did}/annotations", json={"op": "auto"},
                       headers=h).json()
    texts = sorted(a["surface_text"] for a in made)
    assert texts == ["Abies", "Picea"]
    listing = client.get(f"/files/{did}/annotations", headers=h).json()
    assert len(listing) == 2


def test_project_integrate_content_types(client, workspace):
    h, pid, did = (workspace["headers"], workspace["project_id"],
                   workspace["doc_id"])
    client.post(f"/files/{did}/lock", headers=h)
    client.post(f"/files/{did}/integrate", headers=h, json={})

    plain = client.post(f"/projects/{pid}/integrate", headers=h)
    assert plain.status_code == 200
    assert plain.headers["content-type"].startswith("text/csv")
    assert plain.text.splitlines()[0] == "site,count,longitude,latitude,species,year"

    both = client.post(f"/projects/{pid}/integrate",
                       params={"include": "provenance"}, headers=h)
    assert both.headers["content-type"].startswith("application/json")
    assert set(both.json()) >= {"csv", "provenance_csv"}


def test_me_lists(client, workspace):
    h, did = workspace["headers"], workspace["doc_id"]
    client.post(f"/files/{did}/charge", headers=h)
    mine = client.get("/me/files", headers=h).json()
    assert [d["doc_id"] for d in mine] == [did]
    client.get(f"/files/{did}/meta", headers=h)
    recent = client.get("/me/recent", headers=h).json()
    assert recent[0]["doc_id"] == did


def test_team_membership_endpoints(client, workspace):
    h, tid = workspace["headers"], workspace["team_id"]
    register_login(client, "newbie")
    added = client.post(f"/teams/{tid}/members",
                        json={"username": "newbie", "role": "Member"},
                        headers=h)
    assert added.status_code == 201
    member_id = next(m["user_id"] for m in added.json()["members"]
                     if m["username"] == "newbie")
    patched = client.patch(f"/teams/{tid}/members/{member_id}",
                           json={"role": "Manager"}, headers=h)
    assert patched.status_code == 200
    roles = {m["username"]: m["role"] for m in patched.json()["members"]}
    assert roles["newbie"] == "Manager"
    gone = client.patch(f"/teams/{tid}/members/{member_id}",
                        json={"remove": True}, headers=h)
    assert all(m["user_id"] != member_id for m in gone.json()["members"])


def test_project_delete_hides_documents(client, workspace):
    h, pid, did = (workspace["headers"], workspace["project_id"],
                   workspace["doc_id"])
    assert client.delete(f"/projects/{pid}", headers=h).status_code == 204
    assert client.get(f"/projects/{pid}", headers=h).status_code == 404
    assert client.get(f"/files/{did}/meta", headers=h).status_code == 404
