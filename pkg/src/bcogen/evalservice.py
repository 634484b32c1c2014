"""HTTP API over the run store powering the evaluation UI.

Plain JSON over HTTP, no authentication, bound to 127.0.0.1 by default: the
evaluator is a local single-user application. The service is read-only except
for the human-evaluation PUT. Static UI assets, when built, are served by the
same process under /.
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import CorruptIndex, ScoreOutOfRange, UnknownRun
from .evaluation import HumanEvaluation, record_human_evaluation
from .runstore import PaperStore, RunStore

DEFAULT_PORT = 8731
DEFAULT_HOST = "127.0.0.1"

log = logging.getLogger(__name__)

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><title>bcogen evaluator</title></head>
<body>
<h1>bcogen evaluation service</h1>
<p>No UI build found. The JSON API is live under <code>/api/runs</code>.</p>
</body></html>
"""


def resolve_paper_id(store: RunStore, paper_id: str | None) -> str:
    papers = store.paper_ids()
    if paper_id is not None:
        if paper_id not in papers:
            raise UnknownRun(f"store has no paper {paper_id!r}; found: {papers}")
        return paper_id
    if len(papers) == 1:
        return papers[0]
    if not papers:
        raise UnknownRun(f"store at {store.root} has no persisted papers")
    raise UnknownRun(
        f"store has multiple papers ({', '.join(papers)}); pass --paper to pick one"
    )


def _run_detail(paper: PaperStore, run_id: str) -> dict:
    output_map = paper.list_runs()
    position = None
    for i, entry in enumerate(output_map.runs, start=1):
        if entry.run_id == run_id:
            position = i
            break
    if position is None:
        raise UnknownRun(f"no run {run_id!r}")
    record = paper.load_run(run_id)
    evaluations = paper.evaluations_for(run_id)
    return {
        "run_id": record.run_id,
        "domain": record.domain,
        "generated_json": record.generated_json,
        "curated_json": paper.curated_for(record.domain),
        "source_nodes": [n.to_dict() for n in record.source_nodes],
        "parameter_set": record.parameter_set.to_dict(),
        "metrics": paper.load_metrics(run_id),
        "human_evaluation": evaluations[-1].to_dict() if evaluations else None,
        "validation": [v.to_dict() for v in record.validation],
        "raw_response": record.raw_response,
        "attempts": record.attempts,
        "created_at": record.created_at,
        "position": {"index": position, "total": len(output_map.runs)},
    }


def create_app(
    root: str | Path,
    paper_id: str | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    store = RunStore(root)
    app = FastAPI(title="bcogen evaluation service", docs_url=None, redoc_url=None)

    def paper() -> PaperStore:
        return PaperStore(store, resolve_paper_id(store, paper_id))

    @app.exception_handler(CorruptIndex)
    async def corrupt_index_handler(request: Request, exc: CorruptIndex):
        return JSONResponse(
            status_code=500,
            content={"error": str(exc), "dangling": exc.dangling},
        )

    @app.exception_handler(UnknownRun)
    async def unknown_run_handler(request: Request, exc: UnknownRun):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(ScoreOutOfRange)
    async def score_handler(request: Request, exc: ScoreOutOfRange):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/api/runs")
    def list_runs() -> list[dict]:
        output_map = paper().list_runs()
        total = len(output_map.runs)
        return [
            {
                "run_id": e.run_id,
                "domain": e.domain,
                "parameter_set_digest": e.parameter_set_digest,
                "created_at": e.created_at,
                "has_human_eval": e.has_human_eval,
                "position": {"index": i, "total": total},
            }
            for i, e in enumerate(output_map.runs, start=1)
        ]

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str) -> dict:
        return _run_detail(paper(), run_id)

    @app.put("/api/runs/{run_id}/evaluation", status_code=204)
    async def put_evaluation(run_id: str, request: Request) -> Response:
        body: dict[str, Any] = await request.json()
        body["run_id"] = run_id
        try:
            evaluation = HumanEvaluation.from_dict(body)
        except (KeyError, TypeError, ValueError) as exc:
            return JSONResponse(
                status_code=400, content={"error": f"malformed evaluation body: {exc}"}
            )
        record_human_evaluation(evaluation, paper())
        return Response(status_code=204)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    else:
        @app.get("/", response_class=HTMLResponse)
        def index() -> str:
            return _PLACEHOLDER_PAGE

    return app


def default_static_dir() -> Path | None:
    """The built frontend, when present next to the installed package or in a
    source checkout."""
    package_dir = Path(__file__).resolve().parent
    candidates = [
        package_dir / "static",
        package_dir.parent.parent / "frontend" / "dist",
    ]
    for candidate in candidates:
        if candidate.is_dir():
            return candidate
    return None


def serve(root: str | Path, paper_id: str | None, host: str, port: int) -> None:
    import uvicorn

    app = create_app(root, paper_id=paper_id, static_dir=default_static_dir())
    log.info("serving evaluation UI on http://%s:%d", host, port)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Run the evaluation service")
    parser.add_argument("--output", default="output", help="run store root")
    parser.add_argument("--paper", default=None, help="paper id to serve")
    parser.add_argument("--host", default=DEFAULT_HOST)
    parser.add_argument("--port", type=int, default=DEFAULT_PORT)
    args = parser.parse_args(argv)
    serve(args.output, args.paper, args.host, args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
