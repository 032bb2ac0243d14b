import random

import pytest
from fastapi.testclient import TestClient

from paperquarry.config import ServiceConfig
from paperquarry.service import Service, create_app

# low scrypt cost keeps account setup fast in tests
FAST_AUTH = {"scrypt_cost": 2 ** 4}

DEFAULT_SCHEMA = {
    "headers": ["site", "count", "longitude", "latitude", "species", "year"],
    "aliases": {},
    "label_to_header": {"taxa": "species"},
    "meta_to_header": {"year": "year"},
}

DEFAULT_LABELS = [{
    "label_id": "taxa", "display_name": "Taxa", "color": "#e8b931",
    "visible": True, "matchers": [["dictionary", ["Abies", "Picea"]]],
}]


class FakeClock:
    """Mutable time source for lease expiry tests."""

    def __init__(self, start: float = 1_700_000_000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, secs: float) -> None:
        self.now += secs


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture
def service(clock):
    svc = Service(ServiceConfig(**FAST_AUTH), clock=clock)
    yield svc
    svc.store.close()


@pytest.fixture
def client(service):
    app = create_app(service)
    with TestClient(app, raise_server_exceptions=True) as tc:
        yield tc


@pytest.fixture
def rng():
    return random.Random(20260822)


def register_login(client, username, password="pw") -> tuple[str, dict]:
    """Registers (idempotently ignoring duplicates) and logs in."""
    client.post("/auth/register",
                json={"username": username, "password": password})
    resp = client.post("/auth/login",
                       json={"username": username, "password": password})
    assert resp.status_code == 200, resp.text
    body = resp.json()
    return body["token"], {"Authorization": f"Bearer {body['token']}"}


def make_workspace(client, headers, schema=None, labels=None):
    """Team plus one project with a usable schema; returns their ids."""
    team = client.post("/teams", json={"name": "crew"}, headers=headers).json()
    settings = {"schema": schema if schema is not None else DEFAULT_SCHEMA,
                "labels": labels if labels is not None else DEFAULT_LABELS}
    proj = client.post("/projects", json={
        "team_id": team["team_id"], "name": "dig", "settings": settings,
    }, headers=headers)
    assert proj.status_code == 201, proj.text
    return team["team_id"], proj.json()["project_id"]
