"""HTTP review service: manifest listing, visualization bundles, decisions.

Reads serve from the in-memory record list; decision writes are serialized
through one lock and persisted to the manifest before the response returns.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles

from .manifest import (
    STATUS_RANK,
    PerformanceRecord,
    StatusTransitionError,
    UnknownRecordError,
    find_record,
    load_manifest,
    record_decision,
    save_manifest,
)
from .visualization import build_visualization


def record_summary(record: PerformanceRecord) -> dict:
    return {
        "id": record.id,
        "status": record.status,
        "alignment_score": record.alignment_score,
        "decision": record.decision,
    }


def create_app(
    manifest_path: str | Path,
    workspace: str | Path,
    static_dir: str | Path | None = None,
) -> FastAPI:
    manifest_path = Path(manifest_path)
    workspace = Path(workspace)
    records = load_manifest(manifest_path)
    write_lock = threading.Lock()
    app = FastAPI(title="vocaldyn review service")

    @app.get("/api/performances")
    def list_performances() -> list[dict]:
        return [record_summary(r) for r in records]

    @app.get("/api/performances/{record_id}/visualization")
    def visualization(record_id: str, width: int = 800) -> dict:
        record = _find(record_id)
        if STATUS_RANK[record.status] < STATUS_RANK["aligned"]:
            raise HTTPException(
                409, f"performance {record_id!r} is {record.status!r}; not aligned yet"
            )
        try:
            bundle = build_visualization(record, workspace, width=width)
        except FileNotFoundError as err:
            raise HTTPException(409, str(err))
        return bundle.to_json()

    @app.get("/api/performances/{record_id}/audio")
    def audio(record_id: str) -> FileResponse:
        record = _find(record_id)
        stem = Path(record.stem_path)
        if not stem.is_absolute():
            stem = workspace / stem
        if not stem.exists():
            raise HTTPException(404, f"stem file missing for {record_id!r}")
        return FileResponse(stem, media_type="audio/wav")

    @app.post("/api/performances/{record_id}/decision")
    async def decide(record_id: str, request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(400, "request body must be JSON")
        if not isinstance(body, dict) or body.get("decision") not in ("accept", "reject"):
            raise HTTPException(400, 'body must be {"decision": "accept"|"reject", "note"?: str}')
        note = body.get("note") or ""
        if not isinstance(note, str):
            raise HTTPException(400, "note must be a string")
        with write_lock:
            try:
                record = record_decision(
                    records,
                    record_id,
                    body["decision"],
                    by=str(body.get("by") or "reviewer"),
                    note=note,
                )
            except UnknownRecordError:
                raise HTTPException(404, f"unknown performance {record_id!r}")
            except StatusTransitionError as err:
                raise HTTPException(409, str(err))
            save_manifest(manifest_path, records)
        return record_summary(record)

    def _find(record_id: str) -> PerformanceRecord:
        try:
            return find_record(records, record_id)
        except UnknownRecordError:
            raise HTTPException(404, f"unknown performance {record_id!r}")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app


def serve_review(
    manifest_path: str | Path,
    workspace: str | Path,
    host: str = "127.0.0.1",
    port: int = 8000,
    static_dir: str | Path | None = None,
):  # pragma: no cover - exercised manually; endpoints tested via TestClient
    import uvicorn

    app = create_app(manifest_path, workspace, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
