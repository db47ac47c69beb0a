"""Review service: HTTP surface for the manual-check loop.

Endpoints:
    GET  /api/qa/batch?limit=N   sampled records awaiting review, with preview URLs
    GET  /api/media/{id}         preview image bytes (PPM or PNG)
    POST /api/qa/verdict         {"class_id", "verdict": "good"|"bad", "note"} -> {"affected": n}
    GET  /api/stats              per-status counts and per-domain totals
    POST /api/regenerate/run     annotation pass over regenerating records

Verdicts are applied and persisted before the response is sent. The optional
static directory serves the browser review client.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass

import uvicorn
from fastapi import FastAPI, HTTPException, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..errors import EvcapError, UnknownClassError
from . import engine
from .client import CaptionClient, MockCaptionClient
from .manifest import ManifestRecord, ManifestStore, MediaKind, Status

log = logging.getLogger("evcap.review")


class VerdictRequest(BaseModel):
    class_id: str
    verdict: str
    note: str = ""


def _record_view(record: ManifestRecord) -> dict:
    view = {
        "id": record.id,
        "domain": record.domain.value,
        "class_id": record.class_id,
        "media_paths": list(record.media_paths),
        "media_kind": record.media_kind.value,
        "question": record.question,
        "caption": record.caption,
        "status": record.status.value,
        "attempt": record.attempt,
        "updated_at": record.updated_at,
    }
    view["preview_urls"] = [
        f"/api/media/{record.id}?frame={i}" for i in range(len(record.media_paths))
    ]
    return view


def create_review_app(
    store: ManifestStore,
    client: CaptionClient | None = None,
    max_in_flight: int = 4,
    seed: int = 0,
    static_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="caption review service")
    caption_client = client if client is not None else MockCaptionClient()

    @app.get("/api/qa/batch")
    def qa_batch(limit: int = 50) -> list[dict]:
        if limit < 1:
            raise HTTPException(status_code=400, detail="limit must be >= 1")
        sampled = store.by_status(Status.QA_SAMPLED)
        sampled.sort(key=lambda r: (r.class_id, r.id))
        return [_record_view(r) for r in sampled[:limit]]

    @app.get("/api/media/{record_id}")
    def media(record_id: str, frame: int = 0) -> Response:
        try:
            record = store.get(record_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no record {record_id!r}")
        if not (0 <= frame < len(record.media_paths)):
            raise HTTPException(status_code=404, detail=f"no frame {frame}")
        path = record.media_paths[frame]
        try:
            if record.media_kind is MediaKind.EVENT_STREAM:
                body = engine.render_stream_preview(path)
                mime = "image/x-portable-pixmap"
            else:
                with open(path, "rb") as fh:
                    body = fh.read()
                mime = engine.media_mime(path)
        except (OSError, EvcapError) as exc:
            raise HTTPException(status_code=404, detail=f"media unavailable: {exc}")
        return Response(content=body, media_type=mime)

    @app.post("/api/qa/verdict")
    def verdict(req: VerdictRequest) -> dict:
        if req.verdict not in ("good", "bad"):
            raise HTTPException(status_code=400, detail="verdict must be 'good' or 'bad'")
        try:
            affected = engine.apply_verdict(store, req.class_id, req.verdict)
        except UnknownClassError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        if req.note:
            log.info("verdict %s on class %s: %s", req.verdict, req.class_id, req.note)
        if store.path:
            store.save()
        return {"affected": affected}

    @app.get("/api/stats")
    def stats() -> dict:
        return store.stats()

    @app.post("/api/regenerate/run")
    def regenerate() -> dict:
        return engine.run_annotation(
            store, caption_client, max_in_flight=max_in_flight, seed=seed
        )

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app


@dataclass
class ReviewServiceHandle:
    server: uvicorn.Server
    thread: threading.Thread
    host: str
    port: int

    def stop(self, timeout: float = 5.0) -> None:
        self.server.should_exit = True
        self.thread.join(timeout)


def serve_review_api(
    store: ManifestStore,
    bind: str = "127.0.0.1:8787",
    client: CaptionClient | None = None,
    static_dir: str | None = None,
    max_in_flight: int = 4,
    seed: int = 0,
    wait_ready: float = 10.0,
) -> ReviewServiceHandle:
    """Start the service on a background thread; returns a stoppable handle."""
    host, _, port_text = bind.partition(":")
    port = int(port_text or "8787")
    app = create_review_app(store, client, max_in_flight, seed, static_dir)
    config = uvicorn.Config(app, host=host or "127.0.0.1", port=port, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, name="review-service", daemon=True)
    thread.start()
    deadline = time.monotonic() + wait_ready
    while not server.started:
        if not thread.is_alive() or time.monotonic() > deadline:
            raise EvcapError(f"review service failed to start on {bind}")
        time.sleep(0.02)
    return ReviewServiceHandle(server, thread, host or "127.0.0.1", port)
