"""HTTP API over the exploration pipeline.

Read-only endpoints against an immutable snapshot + index generation:

    POST /api/explore    {query, filters?, limit?, topic_mode?} -> exploration
    POST /api/search     {query, filters?, limit?} -> fused results only
    GET  /api/graph/{query_id}      -> persisted graph.json
    GET  /api/analytics/{query_id}  -> persisted analytics.json
    GET  /api/paper/{paper_id}?query_id=...  -> metadata (+ graph-local impact)
    GET  /api/health
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import ServiceConfig
from .errors import ConsistencyError, ExploreError, NotFoundError
from .pipeline import Explorer
from .retrieval import FilterSpec


class FilterBody(BaseModel):
    year_from: Optional[int] = None
    year_to: Optional[int] = None
    authors: Optional[list[str]] = None
    institutions: Optional[list[str]] = None
    countries: Optional[list[str]] = None

    def to_spec(self) -> FilterSpec:
        year_range = None
        if self.year_from is not None or self.year_to is not None:
            year_range = (self.year_from or 0, self.year_to or 9999)
        return FilterSpec(
            year_range=year_range,
            authors=frozenset(self.authors) if self.authors else None,
            institutions=frozenset(self.institutions) if self.institutions else None,
            countries=frozenset(self.countries) if self.countries else None,
        )


class ExploreBody(BaseModel):
    query: str = Field(min_length=1)
    filters: Optional[FilterBody] = None
    limit: Optional[int] = Field(default=None, ge=1)
    topic_mode: Optional[str] = None


def create_app(explorer: Explorer) -> FastAPI:
    app = FastAPI(title="litexplore", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(NotFoundError)
    async def not_found(_: Request, exc: NotFoundError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(ConsistencyError)
    async def conflict(_: Request, exc: ConsistencyError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(ExploreError)
    async def bad_request(_: Request, exc: ExploreError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def invalid(_: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/api/health")
    def health():
        return explorer.health()

    @app.post("/api/explore")
    def explore(body: ExploreBody):
        filters = body.filters.to_spec() if body.filters else FilterSpec()
        request = explorer.make_request(body.query, filters=filters, limit=body.limit)
        return explorer.explore(request, topic_mode=body.topic_mode)

    @app.post("/api/search")
    def search(body: ExploreBody):
        filters = body.filters.to_spec() if body.filters else FilterSpec()
        request = explorer.make_request(body.query, filters=filters, limit=body.limit)
        return explorer.search(request)

    @app.get("/api/graph/{query_id}")
    def graph(query_id: str):
        return explorer.load_artifact(query_id, "graph.json")

    @app.get("/api/analytics/{query_id}")
    def analytics(query_id: str):
        return explorer.load_artifact(query_id, "analytics.json")

    @app.get("/api/paper/{paper_id}")
    def paper(paper_id: str, query_id: Optional[str] = None):
        return explorer.paper_detail(paper_id, qid=query_id)

    return app


def serve(config: ServiceConfig):
    """Load artifacts, bind and serve until interrupted."""
    import uvicorn

    explorer = Explorer.from_config(config)
    app = create_app(explorer)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="info")
