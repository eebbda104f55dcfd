"""The HTTP application: two endpoints, strict status codes.

Status codes are part of the wire contract: 200 success, 400 malformed
request body, 413 batch larger than the configured maximum, 503 while the
encoder has not finished loading. ``create_app(auto_load=False)`` leaves
loading to the caller (``app.state.load()``), which is how the 503-then-
200 startup window is exercised in tests.
"""

from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import ServiceConfig
from .encoders import load_encoder


class EmbedRequest(BaseModel):
    sentences: list[str]


def create_app(config: ServiceConfig | None = None, auto_load: bool = True) -> FastAPI:
    cfg = config or ServiceConfig()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if auto_load:
            app.state.load()
        yield

    app = FastAPI(title="embedding-service", lifespan=lifespan)
    app.state.encoder = None

    def load() -> None:
        if app.state.encoder is None:
            app.state.encoder = load_encoder(cfg.model)

    app.state.load = load
    app.state.config = cfg

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed request body"})

    @app.get("/health")
    async def health():
        encoder = app.state.encoder
        if encoder is None:
            return JSONResponse(status_code=503, content={"status": "loading"})
        return {"status": "ok", "dim": encoder.dim}

    @app.post("/embed")
    async def embed(request: EmbedRequest):
        encoder = app.state.encoder
        if encoder is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        if len(request.sentences) > cfg.max_batch:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(request.sentences)} exceeds max_batch={cfg.max_batch}",
            )
        vectors = encoder.encode(request.sentences)
        return {
            "embeddings": [vec.tolist() for vec in vectors],
            "dim": encoder.dim,
            "model": encoder.name,
        }

    return app
