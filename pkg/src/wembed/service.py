"""Read-only REST API over a loaded embedding model.

Endpoints serialize store results verbatim: nearest neighbors, pairwise
similarity, vocabulary membership, plus a health probe and the optional
static web UI bundle. The model is immutable after load, so handlers are
stateless and safe under arbitrary concurrency. The service never proxies
the Wikidata API; label resolution belongs to the browser.
"""

from __future__ import annotations

import sys
from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse

from . import store
from .ids import is_valid_entity_id
from .trainer import EmbeddingModel

MODEL_FORMAT_VERSION = "1"


@dataclass
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    model_path: str | None = None
    static_dir: str | None = None
    k_default: int = 10
    k_max: int = 100
    cors_origins: tuple[str, ...] = ("*",)

    def __post_init__(self) -> None:
        if not 1 <= self.k_default <= self.k_max:
            raise ValueError(f"need 1 <= k_default <= k_max, got {self.k_default}, {self.k_max}")


def _error(status: int, payload: dict) -> JSONResponse:
    return JSONResponse(payload, status_code=status)


def _bad_id(entity: str) -> JSONResponse:
    return _error(400, {"error": "malformed-entity-id", "entity": entity})


def _round6(value: float) -> float:
    return round(float(value), 6)


def create_app(
    model: EmbeddingModel | None = None,
    config: ApiConfig | None = None,
) -> FastAPI:
    """Build the application; the model comes in directly or via config.model_path.

    With only a path, loading happens during startup (lifespan); the health
    endpoint answers 503 until it completes.
    """
    config = config or ApiConfig()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if app.state.model is None and config.model_path:
            loaded = store.load_text(config.model_path)
            index = store.UnitIndex(loaded)
            if index.n_zero_rows:
                print(
                    f"wembed: {index.n_zero_rows} zero-norm vectors excluded from neighbor results",
                    file=sys.stderr,
                )
            app.state.index = index
            app.state.model = loaded
        yield

    app = FastAPI(title="wembed", lifespan=lifespan)
    app.state.model = None
    app.state.index = None
    if model is not None:
        app.state.model = model
        app.state.index = store.UnitIndex(model)

    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(config.cors_origins),
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    def _ready(request: Request) -> tuple[EmbeddingModel, store.UnitIndex] | None:
        m = request.app.state.model
        if m is None:
            return None
        return m, request.app.state.index

    @app.get("/api/most-similar/{entity}")
    def most_similar(entity: str, request: Request, n: str | None = None):
        loaded = _ready(request)
        if loaded is None:
            return _error(503, {"status": "loading"})
        if not is_valid_entity_id(entity):
            return _bad_id(entity)
        if n is None:
            k = config.k_default
        else:
            try:
                k = int(n)
            except ValueError:
                return _error(400, {"error": "invalid-n", "n": n})
            if not 1 <= k <= config.k_max:
                return _error(400, {"error": "n-out-of-range", "n": k, "max": config.k_max})
        m, index = loaded
        try:
            hits = store.most_similar(m, entity, k, index=index)
        except store.NotInVocabulary as exc:
            return _error(404, {"error": "not-in-vocabulary", "entity": exc.entity})
        return JSONResponse(
            {
                "query": entity,
                "n": k,
                "most_similar": [
                    {"item": str(hit.entity), "similarity": _round6(hit.score)} for hit in hits
                ],
            }
        )

    @app.get("/api/similarity/{a}/{b}")
    def similarity(a: str, b: str, request: Request):
        loaded = _ready(request)
        if loaded is None:
            return _error(503, {"status": "loading"})
        for entity in (a, b):
            if not is_valid_entity_id(entity):
                return _bad_id(entity)
        m, _ = loaded
        try:
            score = store.similarity(m, a, b)
        except store.NotInVocabulary as exc:
            return _error(404, {"error": "not-in-vocabulary", "entity": exc.entity})
        return JSONResponse({"entity1": a, "entity2": b, "similarity": _round6(score)})

    @app.get("/api/vocab/{entity}")
    def vocab(entity: str, request: Request):
        loaded = _ready(request)
        if loaded is None:
            return _error(503, {"status": "loading"})
        if not is_valid_entity_id(entity):
            return _bad_id(entity)
        m, _ = loaded
        return JSONResponse({"entity": entity, "in_vocabulary": store.contains(m, entity)})

    @app.get("/healthz")
    def healthz(request: Request):
        loaded = _ready(request)
        if loaded is None:
            return _error(503, {"status": "loading"})
        m, _ = loaded
        return JSONResponse({"status": "ok", "vocab_size": len(m.vocab), "dim": m.dim})

    def _static_root() -> Path | None:
        if config.static_dir is None:
            return None
        root = Path(config.static_dir)
        return root if root.is_dir() else None

    @app.get("/")
    def index_page():
        root = _static_root()
        if root is not None:
            index_file = root / "index.html"
            if index_file.is_file():
                return FileResponse(index_file, media_type="text/html")
        return _error(
            404,
            {"error": "no-ui-bundle", "hint": "API lives under /api/; serve a bundle with --static DIR"},
        )

    @app.get("/static/{asset_path:path}")
    def static_asset(asset_path: str):
        root = _static_root()
        if root is None:
            return _error(404, {"error": "no-ui-bundle"})
        target = (root / asset_path).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            return _error(404, {"error": "not-found", "path": asset_path})
        return FileResponse(target)

    return app
