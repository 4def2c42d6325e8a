"""HTTP + JSON adapter over ExperimentService.

All request and response bodies are UTF-8 JSON. The adapter only maps
payloads and error types onto status codes; every rule lives in the service
core so the two stay in lockstep.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .service import ExperimentService, ServiceError, ValidationFailedError


class SessionRequest(BaseModel):
    author_id: str


class SentencesRequest(BaseModel):
    stage: str
    sentences: list[str]


class JudgmentTaskRequest(BaseModel):
    rater_id: str


class JudgmentRequest(BaseModel):
    rater_id: str
    choice: str | int


def create_app(service: ExperimentService, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="storyfill experiment service")

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        body = {"error": str(exc)}
        if isinstance(exc, ValidationFailedError):
            body["verdicts"] = exc.verdicts
        return JSONResponse(status_code=exc.status_code, content=body)

    @app.post("/sessions")
    def create_session(req: SessionRequest):
        return service.create_session(req.author_id)

    @app.get("/sessions/{session_id}/prompts")
    def get_prompts(session_id: str):
        return service.session_descriptor(session_id)

    @app.get("/sessions/{session_id}/prompts/{prompt_index}/examples")
    def get_examples(session_id: str, prompt_index: int):
        return {"examples": service.get_examples(session_id, prompt_index)}

    @app.post("/sessions/{session_id}/prompts/{prompt_index}/sentences")
    def submit_sentences(session_id: str, prompt_index: int, req: SentencesRequest):
        return service.submit_sentences(session_id, prompt_index, req.stage, req.sentences)

    @app.post("/judgments/tasks")
    def create_judgment_task(req: JudgmentTaskRequest):
        return service.create_judgment_task(req.rater_id)

    @app.get("/judgments/tasks/{rater_id}")
    def get_judgment_task(rater_id: str):
        return service.judgment_task_view(rater_id)

    @app.post("/judgments/{group_id}")
    def submit_judgment(group_id: str, req: JudgmentRequest):
        return service.submit_judgment(req.rater_id, group_id, req.choice)

    @app.get("/export/blocks")
    def export_blocks():
        exported = service.export_blocks()
        return {
            "blocks": [b.to_record() for b in exported["blocks"]],
            "dropped": exported["dropped"],
        }

    @app.get("/export/responses")
    def export_responses():
        return {
            "responses": [
                {
                    "group_id": r.group_id,
                    "rater_id": r.rater_id,
                    "preferred": r.preferred,
                    "timestamp": r.timestamp,
                }
                for r in service.export_responses()
            ]
        }

    if static_dir is not None:
        # browser client; mounted last so API routes take precedence
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


__all__ = ["create_app"]
