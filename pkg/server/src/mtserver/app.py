"""FastAPI application implementing the model-backend HTTP protocol.

Routes (UTF-8 JSON over POST):

    /v1/translate   {"text": s, "src": "zh", "tgt": "en"} -> {"translation": s}
    /v1/mlm_scores  {"tokens": [...]}                     -> {"scores": [...]}
    /v1/sent_sim    {"a": s, "b": s}                      -> {"score": f}
    /v1/perceptual  {"a_png_b64": s, "b_png_b64": s}      -> {"similarity": f}
    /v1/health      GET                                   -> {"status", "models"}

Error mapping: 400 with {"error": msg} on schema violations, 422 on
payloads that decode but cannot be used (bad PNG bytes, unsupported
language pair), 503 while models are still loading.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .backends import UnrenderableError, decode_png_b64, make_backend


class TranslateIn(BaseModel):
    text: str
    src: str
    tgt: str


class MlmIn(BaseModel):
    tokens: list[str]


class SentSimIn(BaseModel):
    a: str
    b: str


class PerceptualIn(BaseModel):
    a_png_b64: str
    b_png_b64: str


def create_app(cfg):
    app = FastAPI(title="mt-model-server", docs_url=None, redoc_url=None)
    state = {"backend": None, "error": None}
    gate = threading.Semaphore(cfg.max_concurrency)

    def load():
        try:
            state["backend"] = make_backend(cfg)
        except Exception as exc:  # surfaced via /v1/health and 503s
            state["error"] = "%s: %s" % (type(exc).__name__, exc)

    loader = threading.Thread(target=load, daemon=True)
    loader.start()

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error": "schema violation: %s" % exc.errors()})

    def backend_or_503():
        backend = state["backend"]
        if backend is None:
            detail = state["error"] or "models are still loading"
            return None, JSONResponse(status_code=503, content={"error": detail})
        return backend, None

    @app.get("/v1/health")
    def health():
        backend, err = backend_or_503()
        if err is not None:
            return err
        return {"status": "ok", "backend": cfg.backend,
                "models": backend.identities(),
                "decoding": "deterministic (greedy, no sampling)"}

    @app.post("/v1/translate")
    def translate(body: TranslateIn):
        backend, err = backend_or_503()
        if err is not None:
            return err
        with gate:
            try:
                return {"translation": backend.translate(body.text, body.src, body.tgt)}
            except ValueError as exc:
                return JSONResponse(status_code=422, content={"error": str(exc)})

    @app.post("/v1/mlm_scores")
    def mlm_scores(body: MlmIn):
        backend, err = backend_or_503()
        if err is not None:
            return err
        if not body.tokens:
            return JSONResponse(status_code=422,
                                content={"error": "tokens must be non-empty"})
        with gate:
            return {"scores": [float(s) for s in backend.mlm_scores(body.tokens)]}

    @app.post("/v1/sent_sim")
    def sent_sim(body: SentSimIn):
        backend, err = backend_or_503()
        if err is not None:
            return err
        with gate:
            return {"score": float(backend.sent_sim(body.a, body.b))}

    @app.post("/v1/perceptual")
    def perceptual(body: PerceptualIn):
        backend, err = backend_or_503()
        if err is not None:
            return err
        try:
            img_a = decode_png_b64(body.a_png_b64)
            img_b = decode_png_b64(body.b_png_b64)
            with gate:
                return {"similarity": float(backend.perceptual(img_a, img_b))}
        except UnrenderableError as exc:
            return JSONResponse(status_code=422, content={"error": str(exc)})

    return app
