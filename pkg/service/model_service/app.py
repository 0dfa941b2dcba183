"""FastAPI application exposing /propose, /embed and /health."""

from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .backends import MASK, build_embedder, build_proposer
from .config import ServiceConfig


class ProposeRequest(BaseModel):
    text: str
    mode: str = "substitute"
    top_k: int = Field(default=10, ge=1)


class Candidate(BaseModel):
    word: str
    score: float


class ProposeResponse(BaseModel):
    candidates: list[Candidate]


class EmbedRequest(BaseModel):
    texts: list[str]


class EmbedResponse(BaseModel):
    vectors: list[list[float]]
    dim: int


def create_app(config: ServiceConfig | None = None, defer_load: bool = False) -> FastAPI:
    """Build the service; models load once at startup.

    With defer_load=True the backends stay unloaded until load_models() is
    called on the returned app, which lets tests exercise the 503 path.
    """
    config = config or ServiceConfig()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if not defer_load:
            app.load_models()
        yield

    app = FastAPI(title="emoaug model service", lifespan=lifespan)
    app.state.config = config
    app.state.proposer = None
    app.state.embedder = None

    def load_models() -> None:
        app.state.proposer = build_proposer(config.proposer_model)
        app.state.embedder = build_embedder(config.embedder_model)

    app.load_models = load_models

    def _ready():
        if app.state.proposer is None or app.state.embedder is None:
            raise HTTPException(status_code=503, detail="models are still loading")

    @app.get("/health")
    def health():
        _ready()
        return {
            "status": "ok",
            "proposer": app.state.proposer.name,
            "embedder": app.state.embedder.name,
        }

    @app.post("/propose", response_model=ProposeResponse)
    def propose(req: ProposeRequest):
        _ready()
        if req.text.count(MASK) != 1:
            raise HTTPException(
                status_code=400,
                detail=f"text must contain exactly one {MASK} token",
            )
        if req.mode not in ("insert", "substitute"):
            raise HTTPException(status_code=400, detail=f"unknown mode {req.mode!r}")
        top_k = min(req.top_k, config.top_k_cap)
        raw = app.state.proposer.fill(req.text, top_k)
        # single-token candidates only, scores clamped into [0, 1]
        candidates = [
            Candidate(word=w, score=max(0.0, min(1.0, s)))
            for w, s in raw
            if w and not any(ch.isspace() for ch in w)
        ]
        candidates.sort(key=lambda c: -c.score)
        return ProposeResponse(candidates=candidates[:top_k])

    @app.post("/embed", response_model=EmbedResponse)
    def embed(req: EmbedRequest):
        _ready()
        if not req.texts:
            raise HTTPException(status_code=400, detail="texts must be non-empty")
        if len(req.texts) > config.batch_cap:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(req.texts)} exceeds cap {config.batch_cap}",
            )
        vectors = app.state.embedder.embed(req.texts)
        return EmbedResponse(vectors=vectors, dim=app.state.embedder.dim)

    return app
