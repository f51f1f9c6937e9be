"""Server configuration."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

DEFAULT_LEXICON = os.path.join(os.path.dirname(__file__), "data", "demo_lexicon.json")

# the real-model setup this sidecar is meant to serve
DEFAULT_MODELS = {
    "victim": "Helsinki-NLP/opus-mt-zh-en",
    "aux": "Helsinki-NLP/opus-mt-en-zh",
    "mlm": "hfl/chinese-bert-wwm-ext",
    "sim": "sentence-transformers/all-minilm-l6-v2",
    "perceptual": "lpips-alex",
}


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8601
    backend: str = "builtin"          # "builtin" | "transformers"
    device: str = "cpu"
    max_concurrency: int = 8          # bound on in-flight inference calls
    lexicon_path: str = DEFAULT_LEXICON
    src_lang: str = "zh"
    tgt_lang: str = "en"
    models: dict = field(default_factory=lambda: dict(DEFAULT_MODELS))

    def __post_init__(self):
        if self.backend not in ("builtin", "transformers"):
            raise ValueError("backend must be 'builtin' or 'transformers'")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")
        missing = [k for k in DEFAULT_MODELS if not self.models.get(k)]
        if self.backend == "transformers" and missing:
            raise ValueError("missing model identifiers for: %s" % ", ".join(missing))

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        server = raw.get("server", {})
        models = dict(DEFAULT_MODELS)
        models.update(raw.get("models", {}))
        return cls(host=server.get("host", "127.0.0.1"),
                   port=int(server.get("port", 8601)),
                   backend=server.get("backend", "builtin"),
                   device=server.get("device", "cpu"),
                   max_concurrency=int(server.get("max_concurrency", 8)),
                   lexicon_path=server.get("lexicon_path", DEFAULT_LEXICON),
                   src_lang=server.get("src_lang", "zh"),
                   tgt_lang=server.get("tgt_lang", "en"),
                   models=models)
