"""HTTP+JSON surface under /api/v1.

Thin translation layer: parse the bearer token, hand the payload to the
command layer, map ApiError onto status codes.  No domain logic lives
here.
"""

from __future__ import annotations

import time
from contextlib import asynccontextmanager

from fastapi import Body, Depends, FastAPI, Header, Query, Request, Response
from fastapi.responses import JSONResponse

from ..scheme import load_template_dir
from . import config as config_mod
from .auth import SessionManager
from .commands import ApiError, Commands
from .runner import Runner
from .store import Store


def create_app(config: config_mod.ServiceConfig | None = None, *,
               clock=time.time) -> FastAPI:
    cfg = config or config_mod.from_env()
    templates = {t.template_id: t for t in load_template_dir(cfg.templates_dir)}
    store = Store(cfg.data_dir, clock=clock)
    sessions = SessionManager(cfg.session_ttl_h, clock=clock)
    commands = Commands(store, templates, sessions, clock=clock)
    runner = Runner(commands, workers=cfg.workers)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        runner.recover()
        yield
        runner.shutdown()
        store.close()

    app = FastAPI(title="virtual accelerator laboratory", lifespan=lifespan,
                  docs_url=None, redoc_url=None, openapi_url=None)
    app.state.store = store
    app.state.commands = commands
    app.state.runner = runner
    app.state.config = cfg

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(exc.body(), status_code=exc.status)

    def actor(authorization: str | None = Header(None)) -> dict:
        token = None
        if authorization and authorization.startswith("Bearer "):
            token = authorization[len("Bearer "):]
        return commands.resolve_token(token)

    # -- open endpoints ----------------------------------------------------

    @app.get("/api/v1/health")
    def health():
        return {"status": "ok", "seq": store.state["seq"]}

    @app.post("/api/v1/session")
    def create_session(payload: dict = Body(...)):
        return commands.authenticate(payload.get("login"), payload.get("password"))

    # -- users and groups ----------------------------------------------------

    @app.get("/api/v1/users")
    def list_users(user: dict = Depends(actor)):
        return commands.list_users(user)

    @app.post("/api/v1/users", status_code=201)
    def create_user(payload: dict = Body(...), user: dict = Depends(actor)):
        return commands.create_user(user, payload)

    @app.post("/api/v1/users/{user_id}/deactivate")
    def deactivate_user(user_id: str, user: dict = Depends(actor)):
        return commands.deactivate_user(user, user_id)

    @app.get("/api/v1/groups")
    def list_groups(user: dict = Depends(actor)):
        return commands.list_groups(user)

    @app.post("/api/v1/groups", status_code=201)
    def create_group(payload: dict = Body(...), user: dict = Depends(actor)):
        return commands.create_group(user, payload)

    @app.post("/api/v1/groups/{group_id}/teachers")
    def add_teacher(group_id: str, payload: dict = Body(...),
                    user: dict = Depends(actor)):
        return commands.add_teacher(user, group_id, payload)

    @app.post("/api/v1/groups/{group_id}/students")
    def add_student(group_id: str, payload: dict = Body(...),
                    user: dict = Depends(actor)):
        return commands.add_student(user, group_id, payload)

    # -- templates -----------------------------------------------------------

    @app.get("/api/v1/templates")
    def list_templates(user: dict = Depends(actor)):
        return commands.list_templates(user)

    @app.get("/api/v1/templates/{template_id}")
    def get_template(template_id: str, user: dict = Depends(actor)):
        return commands.get_template(user, template_id)

    # -- assignments -----------------------------------------------------------

    @app.post("/api/v1/assignments", status_code=201)
    def create_assignment(payload: dict = Body(...), user: dict = Depends(actor)):
        return commands.create_assignment(user, payload)

    @app.get("/api/v1/assignments")
    def list_assignments(group: str | None = Query(None),
                         user: dict = Depends(actor)):
        return commands.list_assignments(user, group)

    # -- runs --------------------------------------------------------------------

    @app.post("/api/v1/runs", status_code=201)
    def request_run(payload: dict = Body(...), user: dict = Depends(actor)):
        return commands.request_run(user, payload)

    @app.get("/api/v1/runs/{run_id}")
    def get_run(run_id: str, user: dict = Depends(actor)):
        return commands.get_run(user, run_id)

    @app.get("/api/v1/runs/{run_id}/result.csv")
    def run_csv(run_id: str, user: dict = Depends(actor)):
        csv = commands.run_csv(user, run_id)
        return Response(content=csv, media_type="text/csv; charset=utf-8")

    # -- submissions ----------------------------------------------------------------

    @app.post("/api/v1/submissions", status_code=201)
    def save_submission(payload: dict = Body(...), user: dict = Depends(actor)):
        return commands.save_submission(user, payload)

    @app.get("/api/v1/submissions")
    def list_submissions(assignment: str | None = Query(None),
                         user: dict = Depends(actor)):
        return commands.list_submissions(user, assignment)

    @app.get("/api/v1/submissions/{submission_id}")
    def get_submission(submission_id: str, user: dict = Depends(actor)):
        return commands.get_submission(user, submission_id)

    @app.post("/api/v1/submissions/{submission_id}/submit")
    def submit_submission(submission_id: str, user: dict = Depends(actor)):
        return commands.submit_submission(user, submission_id)

    @app.post("/api/v1/submissions/{submission_id}/review")
    def review_submission(submission_id: str, payload: dict = Body(...),
                          user: dict = Depends(actor)):
        return commands.review_submission(user, submission_id, payload)

    # -- reports ----------------------------------------------------------------

    @app.get("/api/v1/reports/progress")
    def progress(group: str | None = Query(None), user: dict = Depends(actor)):
        return commands.progress_report(user, group)

    # Optional browser client: static files mounted last so the API keeps
    # precedence on every /api/v1 path.
    if cfg.ui_dir is not None:
        from starlette.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=cfg.ui_dir, html=True), name="ui")

    return app
