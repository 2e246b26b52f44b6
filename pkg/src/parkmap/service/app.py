"""FastAPI service wrapping the experiment workflows.

The CLI talks to these endpoints (in process by default, over HTTP with
--server); anything a command can do maps one-to-one onto an endpoint here.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..experiments import CompareError, execute_compare, execute_run, execute_snapshot
from .schemas import (
    CompareRequest,
    CompareResponse,
    HealthResponse,
    RunRequest,
    RunResponse,
    SnapshotRequest,
    SnapshotResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="parkmap",
        version=__version__,
        description="Online adaptive parking-availability mapping experiments",
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        try:
            art = execute_run(req.spec, req.out_dir)
        except OSError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return RunResponse(
            out_dir=str(art.out_dir),
            files=art.files,
            config_hash=art.config_hash,
            summary=art.summary,
        )

    @app.post("/compare", response_model=CompareResponse)
    def compare(req: CompareRequest) -> CompareResponse:
        try:
            art = execute_compare(list(req.run_dirs), req.out_dir)
        except CompareError as exc:
            # 409: the directories exist but their configs cannot be merged
            status = 409 if "mismatch" in str(exc) else 400
            raise HTTPException(status_code=status, detail=str(exc)) from exc
        except OSError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return CompareResponse(out_dir=str(art.out_dir), files=art.files, report=art.report)

    @app.post("/snapshot", response_model=SnapshotResponse)
    def snapshot(req: SnapshotRequest) -> SnapshotResponse:
        try:
            art = execute_snapshot(req.spec, req.at_position_m, req.out_dir)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except OSError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return SnapshotResponse(
            out_dir=str(art.out_dir), files=art.files, iterations=art.iterations
        )

    return app


app = create_app()
