"""HTTP/JSON surface over one engine.

POST /workload answers or rejects a workload; GET /budget, /tree and
/cache/stats expose the ledger, the strategy trees, and cache statistics.
No endpoint ever returns a raw count or the data vector.
"""

from __future__ import annotations

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .engine import Engine, Rejected, WorkloadRequest
from .schema import SchemaError


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="privcache", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.post("/workload")
    async def post_workload(request: Request):
        try:
            doc = await request.json()
            wl = WorkloadRequest.from_json(doc)
            result = engine.process(wl)
        except SchemaError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        except (KeyError, TypeError, ValueError) as exc:
            return JSONResponse({"error": f"malformed request: {exc}"}, status_code=400)
        if isinstance(result, Rejected):
            return JSONResponse(
                {
                    "required_epsilon": result.required_epsilon,
                    "remaining_budget": result.remaining_budget,
                },
                status_code=409,
            )
        return {
            "responses": [float(v) for v in result.responses],
            "epsilon": result.epsilon,
            "mechanism": result.mechanism,
            "free_rows": result.free_rows,
            "paid_rows": result.paid_rows,
            "timestamp": result.timestamp,
        }

    @app.get("/budget")
    def get_budget():
        return engine.budget_view()

    @app.get("/tree")
    def get_tree(attrs: str = Query(...)):
        names = [a for a in attrs.split(",") if a]
        try:
            return {"attrs": sorted(set(names)), "nodes": engine.tree_export(names)}
        except SchemaError as exc:
            return JSONResponse({"error": str(exc)}, status_code=404)

    @app.get("/cache/stats")
    def get_cache_stats(attrs: str = Query(...)):
        names = [a for a in attrs.split(",") if a]
        try:
            return engine.cache_stats(names)
        except SchemaError as exc:
            return JSONResponse({"error": str(exc)}, status_code=404)

    @app.get("/schema")
    def get_schema():
        return {
            "attributes": [
                {"name": a.name, "kind": a.kind, "size": a.size, "lo": a.lo}
                for a in engine.schema.attributes
            ],
            "row_count": engine.registry.dataset.row_count,
            "k_arity": engine.config.k_arity,
        }

    return app
