"""HTTP surface of the collaboration service.

Thin FastAPI wiring over Service: routes parse the request, call one
Service method, and return its wire dict.  Every QuarryError becomes a
JSON error body {code, message, details} with the error's HTTP status.
"""

from __future__ import annotations

from fastapi import Body, Depends, FastAPI, File, Header, Query, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from ..errors import InvalidCredentials, QuarryError
from .core import Service

__all__ = ["create_app"]


def create_app(service: Service) -> FastAPI:
    app = FastAPI(title="paperquarry", docs_url=None, redoc_url=None)

    @app.exception_handler(QuarryError)
    async def quarry_error(request: Request, exc: QuarryError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"code": exc.code, "message": exc.message,
                     "details": exc.details})

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "validation_error",
                     "message": "request body or parameters are invalid",
                     "details": {"errors": [
                         {"loc": [str(p) for p in e["loc"]],
                          "msg": e["msg"]} for e in exc.errors()]}})

    def current_user(authorization: str = Header(default="")) -> str:
        scheme, _, token = authorization.partition(" ")
        if scheme.lower() != "bearer" or not token:
            raise InvalidCredentials("missing bearer token")
        return service.authenticate(token.strip())

    # ------------------------------------------------------------------ misc

    @app.get("/health")
    def health():
        return {"status": "ok"}

    # ------------------------------------------------------------------ auth

    @app.post("/auth/register", status_code=201)
    def register(body: dict = Body(...)):
        return service.register(body.get("username", ""),
                                body.get("password", ""))

    @app.post("/auth/login")
    def login(body: dict = Body(...)):
        return service.login(body.get("username", ""),
                             body.get("password", ""))

    # ----------------------------------------------------------------- teams

    @app.get("/teams")
    def list_teams(user: str = Depends(current_user)):
        return service.list_teams(user)

    @app.post("/teams", status_code=201)
    def create_team(body: dict = Body(...), user: str = Depends(current_user)):
        return service.create_team(user, body.get("name", ""))

    @app.get("/teams/{team_id}")
    def get_team(team_id: str, user: str = Depends(current_user)):
        return service.get_team(user, team_id)

    @app.post("/teams/{team_id}/members", status_code=201)
    def add_member(team_id: str, body: dict = Body(...),
                   user: str = Depends(current_user)):
        return service.add_member(user, team_id, body.get("username", ""),
                                  body.get("role", "Member"))

    @app.patch("/teams/{team_id}/members/{member_id}")
    def patch_member(team_id: str, member_id: str, body: dict = Body(...),
                     user: str = Depends(current_user)):
        if body.get("remove"):
            return service.remove_member(user, team_id, member_id)
        return service.set_role(user, team_id, member_id,
                                body.get("role", ""))

    # -------------------------------------------------------------- projects

    @app.get("/projects")
    def list_projects(user: str = Depends(current_user)):
        return service.list_projects(user)

    @app.post("/projects", status_code=201)
    def create_project(body: dict = Body(...),
                       user: str = Depends(current_user)):
        return service.create_project(user, body.get("team_id", ""),
                                      body.get("name", ""),
                                      body.get("settings"))

    @app.get("/projects/{project_id}")
    def get_project(project_id: str, user: str = Depends(current_user)):
        return service.get_project(user, project_id)

    @app.delete("/projects/{project_id}", status_code=204)
    def delete_project(project_id: str, user: str = Depends(current_user)):
        service.delete_project(user, project_id)
        return Response(status_code=204)

    @app.patch("/projects/{project_id}/settings")
    def patch_settings(project_id: str, body: dict = Body(...),
                       user: str = Depends(current_user)):
        return service.update_project_settings(user, project_id, body)

    # --------------------------------------------------------------- files

    @app.post("/projects/{project_id}/files", status_code=201)
    async def import_file(project_id: str, file: UploadFile = File(...),
                          user: str = Depends(current_user)):
        raw = await file.read()
        return service.import_file(user, project_id,
                                   file.filename or "document.pdf", raw)

    @app.get("/projects/{project_id}/files")
    def search_files(project_id: str,
                     query: str = Query(default=""),
                     principal: str = Query(default=""),
                     import_user: str = Query(default=""),
                     sort: str = Query(default="import_time"),
                     order: str = Query(default="desc"),
                     page: int = Query(default=1),
                     page_size: int = Query(default=50),
                     user: str = Depends(current_user)):
        return service.search_documents(
            user, project_id, query=query,
            principal=principal or None, import_user=import_user or None,
            sort=sort, order=order, page=page, page_size=page_size)

    @app.get("/me/files")
    def my_files(user: str = Depends(current_user)):
        return service.my_files(user)

    @app.get("/me/recent")
    def recent_files(user: str = Depends(current_user)):
        return service.recent_files(user)

    # ------------------------------------------------------ locks and charge

    @app.post("/files/{doc_id}/lock", status_code=201)
    def acquire_lock(doc_id: str, user: str = Depends(current_user)):
        return service.acquire_lock(user, doc_id)

    @app.delete("/files/{doc_id}/lock", status_code=204)
    def release_lock(doc_id: str, user: str = Depends(current_user)):
        service.release_lock(user, doc_id)
        return Response(status_code=204)

    @app.post("/files/{doc_id}/charge", status_code=201)
    def take_charge(doc_id: str, user: str = Depends(current_user)):
        return service.take_charge(user, doc_id)

    @app.delete("/files/{doc_id}/charge", status_code=204)
    def release_charge(doc_id: str, user: str = Depends(current_user)):
        service.release_charge(user, doc_id)
        return Response(status_code=204)

    # ------------------------------------------------------------- document

    @app.get("/files/{doc_id}/meta")
    def get_meta(doc_id: str, user: str = Depends(current_user)):
        return service.get_meta(user, doc_id)

    @app.put("/files/{doc_id}/meta")
    def put_meta(doc_id: str, body: dict = Body(...),
                 user: str = Depends(current_user)):
        return service.put_meta(user, doc_id, body)

    @app.get("/files/{doc_id}/pages/{page_index}")
    def get_page(doc_id: str, page_index: int,
                 user: str = Depends(current_user)):
        return service.get_page(user, doc_id, page_index)

    # --------------------------------------------------------------- tables

    @app.get("/files/{doc_id}/tables")
    def list_tables(doc_id: str, user: str = Depends(current_user)):
        return service.list_tables(user, doc_id)

    @app.post("/files/{doc_id}/tables", status_code=201)
    def create_table(doc_id: str, body: dict = Body(...),
                     user: str = Depends(current_user)):
        return service.create_table(user, doc_id,
                                    int(body.get("page_index", 0)),
                                    body.get("bbox"))

    @app.post("/tables/{table_id}/stage")
    def stage_table(table_id: str, body: dict = Body(...),
                    user: str = Depends(current_user)):
        return service.stage_table(user, table_id, body.get("to", ""))

    @app.post("/tables/{table_id}/edits")
    def edit_table(table_id: str, body: dict = Body(...),
                   user: str = Depends(current_user)):
        return service.edit_table(user, table_id, body.get("op", ""),
                                  body.get("params") or {})

    # ---------------------------------------------------------- annotations

    @app.get("/files/{doc_id}/annotations")
    def get_annotations(doc_id: str,
                        include_hidden: bool = Query(default=False),
                        user: str = Depends(current_user)):
        return service.get_annotations(user, doc_id, include_hidden)

    @app.post("/files/{doc_id}/annotations", status_code=201)
    def post_annotations(doc_id: str, body: dict = Body(...),
                         user: str = Depends(current_user)):
        return service.annotate(user, doc_id, body)

    # ------------------------------------------------------------------ map

    @app.get("/files/{doc_id}/map")
    def get_map(doc_id: str, user: str = Depends(current_user)):
        return service.get_map(user, doc_id)

    @app.post("/files/{doc_id}/map/calibrate")
    def calibrate_map(doc_id: str, body: dict = Body(...),
                      user: str = Depends(current_user)):
        return service.calibrate_map(user, doc_id,
                                     int(body.get("page_index", 0)),
                                     body.get("bbox") or [])

    @app.post("/files/{doc_id}/map/points", status_code=201)
    def add_map_point(doc_id: str, body: dict = Body(...),
                      user: str = Depends(current_user)):
        return service.add_map_point(user, doc_id, body.get("pixel") or [],
                                     body.get("table_row_hint"))

    # ------------------------------------------------------------ integrate

    @app.post("/files/{doc_id}/integrate")
    def integrate_file(doc_id: str, user: str = Depends(current_user)):
        return service.integrate_document(user, doc_id)

    @app.post("/projects/{project_id}/integrate")
    def integrate_project(project_id: str,
                          include: str = Query(default=""),
                          user: str = Depends(current_user)):
        result = service.integrate_project_csv(user, project_id)
        if include == "provenance":
            return result
        return Response(content=result["csv"], media_type="text/csv")

    return app
