"""Model backend contracts: HTTP clients and deterministic mocks.

Every external model the pipeline consults goes through one of these
interfaces:

  * victim translator and auxiliary (reverse) translator,
  * masked LM for word importance,
  * multilingual sentence similarity,
  * optional remote perceptual metric.

The HTTP protocol (UTF-8 JSON over POST):

    POST /v1/translate   {"text": s, "src": "zh", "tgt": "en"} -> {"translation": s}
    POST /v1/mlm_scores  {"tokens": [...]}                     -> {"scores": [...]}
    POST /v1/sent_sim    {"a": s, "b": s}                      -> {"score": f}
    POST /v1/perceptual  {"a_png_b64": s, "b_png_b64": s}      -> {"similarity": f}

Errors come back as HTTP 4xx with {"error": msg}; a schema-violating body
raises MalformedResponseError.  Transport failures are retried with backoff
(requests are idempotent); HTTP error statuses are never retried.

The mock backends are pure, deterministic and dependency-free so the whole
primary test suite runs without a network.
"""

from __future__ import annotations

import base64
import io
import threading
import time
from dataclasses import dataclass

import requests

from .errors import (BackendError, BackendUnavailableError,
                     MalformedResponseError)


@dataclass(frozen=True)
class BackendEndpoint:
    base_url: str
    timeout_s: float = 10.0
    retries: int = 2
    backoff_s: float = 0.25
    auth_token: str = None
    max_inflight: int = 8  # bound on concurrent requests to this endpoint

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValueError("timeout must be positive")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")
        if self.max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")


class HttpBackend:
    """Thin JSON client for one model endpoint.

    Safe for concurrent callers; in-flight requests are bounded by the
    endpoint's max_inflight regardless of how many attack workers run.
    """

    def __init__(self, endpoint: BackendEndpoint):
        self.endpoint = endpoint
        self._session = requests.Session()
        self._gate = threading.BoundedSemaphore(endpoint.max_inflight)
        if endpoint.auth_token:
            self._session.headers["Authorization"] = "Bearer " + endpoint.auth_token

    def _post(self, path, payload):
        url = self.endpoint.base_url.rstrip("/") + path
        last_exc = None
        for attempt in range(self.endpoint.retries + 1):
            try:
                with self._gate:
                    resp = self._session.post(url, json=payload,
                                              timeout=self.endpoint.timeout_s)
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_exc = exc
                if attempt < self.endpoint.retries:
                    time.sleep(self.endpoint.backoff_s * (2 ** attempt))
                continue
            if 400 <= resp.status_code < 500:
                try:
                    msg = resp.json().get("error", resp.text)
                except ValueError:
                    msg = resp.text
                raise BackendError("%s rejected request (%d): %s"
                                   % (url, resp.status_code, msg))
            if resp.status_code >= 500:
                raise BackendUnavailableError("%s answered %d" % (url, resp.status_code))
            try:
                return resp.json()
            except ValueError as exc:
                raise MalformedResponseError("%s returned non-JSON body" % url) from exc
        raise BackendUnavailableError("%s unreachable: %s" % (url, last_exc))

    def _field(self, body, key, types):
        if not isinstance(body, dict) or key not in body or not isinstance(body[key], types):
            raise MalformedResponseError("response missing %r of expected type" % key)
        return body[key]

    # -- protocol methods ---------------------------------------------------

    def translate(self, text, src, tgt):
        body = self._post("/v1/translate", {"text": text, "src": src, "tgt": tgt})
        return self._field(body, "translation", str)

    def mlm_scores(self, tokens):
        body = self._post("/v1/mlm_scores", {"tokens": list(tokens)})
        scores = self._field(body, "scores", list)
        if len(scores) != len(tokens) or not all(isinstance(s, (int, float)) for s in scores):
            raise MalformedResponseError("mlm_scores arity/type mismatch")
        return [float(s) for s in scores]

    def sent_sim(self, a, b):
        body = self._post("/v1/sent_sim", {"a": a, "b": b})
        return float(self._field(body, "score", (int, float)))

    def perceptual(self, a, b):
        body = self._post("/v1/perceptual", {"a_png_b64": _png_b64(a),
                                             "b_png_b64": _png_b64(b)})
        return float(self._field(body, "similarity", (int, float)))

    def perceptual_metric_id(self):
        return "remote:" + self.endpoint.base_url


def _png_b64(bitmap):
    buf = io.BytesIO()
    from PIL import Image
    import numpy as np
    arr = np.clip(np.rint(bitmap.pixels * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


# --------------------------------------------------------------------------
# Deterministic mocks
# --------------------------------------------------------------------------

class MockTranslator:
    """Lexicon translator with a char-sensitivity table.

    Forward direction: segment the source, map each word through the
    lexicon.  A word that misses the lexicon but differs from a lexicon word
    in exactly one character is read through robustly, unless the original
    character at the differing position is listed in the sensitivity table,
    in which case the output degrades to that character's perturbation
    string.  This gives character-substitution attacks something real to
    optimize at desk scale: swaps on sensitive characters derail the
    translation, swaps elsewhere do not.

    Reverse direction: word-by-word inverse lexicon over whitespace tokens,
    joined without separators, so round-tripping a lexicon sentence
    reconstructs it exactly.
    """

    def __init__(self, lexicon, sensitivity, segmenter, src_lang="zh", tgt_lang="en"):
        self.lexicon = dict(lexicon)
        self.sensitivity = dict(sensitivity)
        self.segmenter = segmenter
        self.src_lang = src_lang
        self.tgt_lang = tgt_lang
        self._reverse = {}
        for s, t in self.lexicon.items():
            self._reverse.setdefault(t, s)
        self._by_len = {}
        for w in sorted(self.lexicon):
            self._by_len.setdefault(len(w), []).append(w)

    def _nearest_word(self, word):
        """Lexicon word differing in exactly one char, or None."""
        for cand in self._by_len.get(len(word), ()):
            diffs = [i for i, (a, b) in enumerate(zip(cand, word)) if a != b]
            if len(diffs) == 1:
                return cand, diffs[0]
        return None

    def _forward(self, text):
        out = []
        for tok in self.segmenter.segment(text):
            if not tok.is_word:
                continue
            w = tok.text
            if w in self.lexicon:
                out.append(self.lexicon[w])
                continue
            near = self._nearest_word(w)
            if near is None:
                out.append(w)
                continue
            orig_word, pos = near
            orig_char = orig_word[pos]
            if orig_char in self.sensitivity:
                out.append(self.sensitivity[orig_char])
            else:
                out.append(self.lexicon[orig_word])
        return " ".join(out)

    def _backward(self, text):
        return "".join(self._reverse.get(w, w) for w in text.split())

    def translate(self, text, src, tgt):
        if src == self.src_lang and tgt == self.tgt_lang:
            return self._forward(text)
        if src == self.tgt_lang and tgt == self.src_lang:
            return self._backward(text)
        raise BackendError("mock translator handles %s<->%s only, got %s->%s"
                           % (self.src_lang, self.tgt_lang, src, tgt))


class MockMaskedLM:
    """Context-free importance scores from a corpus frequency table.

    The score of a token is its relative corpus frequency, a stand-in for
    the probability a masked LM would assign to the true word.  Tokens
    absent from the table score 0 and therefore rank as maximally important
    under the default ascending attack order.
    """

    def __init__(self, frequencies):
        self.frequencies = dict(frequencies)
        self._total = float(sum(self.frequencies.values())) or 1.0

    def mlm_scores(self, tokens):
        if not tokens:
            raise ValueError("mlm_scores needs at least one token")
        return [self.frequencies.get(t, 0) / self._total for t in tokens]


class MockSentenceSim:
    """Character-bigram Jaccard similarity mapped to [0, 1]."""

    @staticmethod
    def _grams(text):
        if len(text) < 2:
            return {text} if text else set()
        return {text[i:i + 2] for i in range(len(text) - 1)}

    def sent_sim(self, a, b):
        ga, gb = self._grams(a), self._grams(b)
        if not ga and not gb:
            return 1.0
        union = ga | gb
        return len(ga & gb) / len(union)


def reverse_translations(x, y, n, aux, src_lang, tgt_lang):
    """Back-translate the reference into up to n source-side variants.

    The auxiliary model runs in the reverse direction (target language back
    to source).  Results are deduplicated by exact string match and empty
    outputs are dropped; with a deterministic backend there is one variant.
    """
    if n <= 0:
        return []
    out = []
    seen = set()
    for _ in range(n):
        cand = aux.translate(y, src=tgt_lang, tgt=src_lang)
        if cand and cand not in seen:
            seen.add(cand)
            out.append(cand)
    return out


@dataclass
class BackendSuite:
    """Everything the attack engine consults, bundled."""

    victim: object
    aux: object
    mlm: object
    sim: object
    perceptual: object = None  # None = built-in surrogate metric
    src_lang: str = "zh"
    tgt_lang: str = "en"

    @classmethod
    def from_endpoints(cls, victim_ep, aux_ep, mlm_ep, sim_ep, perceptual_ep=None,
                       src_lang="zh", tgt_lang="en"):
        return cls(victim=HttpBackend(victim_ep), aux=HttpBackend(aux_ep),
                   mlm=HttpBackend(mlm_ep), sim=HttpBackend(sim_ep),
                   perceptual=HttpBackend(perceptual_ep) if perceptual_ep else None,
                   src_lang=src_lang, tgt_lang=tgt_lang)
