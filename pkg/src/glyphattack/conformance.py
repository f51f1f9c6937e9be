"""Black-box conformance checks for model backends.

One suite of checks runs identically against the in-process mock backends
and against a live HTTP sidecar (via the models-module client), so protocol
compliance means the two are interchangeable from the engine's view.  The
HTTP-only checks (error schema, health endpoint) are added when a base URL
is supplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import requests

from .errors import GlyphAttackError
from .glyph import GlyphBitmap
from .models import BackendEndpoint, BackendSuite, HttpBackend


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def __str__(self):
        return "%s %s%s" % ("PASS" if self.passed else "FAIL", self.name,
                            (": " + self.detail) if self.detail else "")


def _checker_bitmaps():
    a = np.zeros((24, 24), dtype=np.float32)
    a[4:20, 4:8] = 1.0
    a[4:8, 4:20] = 1.0
    b = np.zeros((24, 24), dtype=np.float32)
    b[4:20, 16:20] = 1.0
    b[16:20, 4:20] = 1.0
    return GlyphBitmap(a, "#a"), GlyphBitmap(b, "#b")


def run_conformance(suite: BackendSuite, sample_a="木林未本", sample_b="海水出山",
                    base_url=None):
    """Run the conformance checks; returns a list of CheckResults."""
    checks = []

    def run(name, fn):
        try:
            ok, detail = fn()
        except GlyphAttackError as exc:
            ok, detail = False, "%s: %s" % (type(exc).__name__, exc)
        except Exception as exc:  # a crashing backend is a failed check
            ok, detail = False, "unexpected %s: %s" % (type(exc).__name__, exc)
        checks.append(CheckResult(name, ok, detail))

    def translate_basic():
        out1 = suite.victim.translate(sample_a, suite.src_lang, suite.tgt_lang)
        out2 = suite.victim.translate(sample_a, suite.src_lang, suite.tgt_lang)
        if not isinstance(out1, str) or not out1:
            return False, "empty or non-string translation"
        if out1 != out2:
            return False, "translation is not deterministic"
        return True, ""
    run("translate-deterministic", translate_basic)

    def aux_reverse():
        out = suite.aux.translate("hello world", suite.tgt_lang, suite.src_lang)
        return isinstance(out, str), "" if isinstance(out, str) else "non-string"
    run("aux-reverse-direction", aux_reverse)

    def mlm_arity():
        tokens = ["alpha", "beta", "gamma"]
        scores = suite.mlm.mlm_scores(tokens)
        if len(scores) != len(tokens):
            return False, "arity %d != %d" % (len(scores), len(tokens))
        if not all(isinstance(s, float) and math.isfinite(s) for s in scores):
            return False, "non-finite or non-float scores"
        return True, ""
    run("mlm-arity", mlm_arity)

    def sim_self():
        val = suite.sim.sent_sim(sample_a, sample_a)
        return val >= 0.99, "self-similarity %r" % val
    run("sim-self", sim_self)

    def sim_symmetric():
        ab = suite.sim.sent_sim(sample_a, sample_b)
        ba = suite.sim.sent_sim(sample_b, sample_a)
        return abs(ab - ba) < 1e-9, "sim(a,b)=%r sim(b,a)=%r" % (ab, ba)
    run("sim-symmetric", sim_symmetric)

    def sim_range():
        val = suite.sim.sent_sim(sample_a, sample_b)
        return -1.0 <= val <= 1.0, "value %r" % val
    run("sim-range", sim_range)

    if suite.perceptual is not None:
        def perceptual_self():
            a, _ = _checker_bitmaps()
            val = suite.perceptual.perceptual(a, a)
            return val >= 0.99, "self-similarity %r" % val
        run("perceptual-self", perceptual_self)

        def perceptual_orders():
            a, b = _checker_bitmaps()
            same = suite.perceptual.perceptual(a, a)
            diff = suite.perceptual.perceptual(a, b)
            return same > diff, "identical %r vs different %r" % (same, diff)
        run("perceptual-orders-pairs", perceptual_orders)

    if base_url is not None:
        def error_schema():
            resp = requests.post(base_url.rstrip("/") + "/v1/translate",
                                 json={"wrong": "fields"}, timeout=10)
            if not (400 <= resp.status_code < 500):
                return False, "bad request answered %d" % resp.status_code
            try:
                body = resp.json()
            except ValueError:
                return False, "4xx body is not JSON"
            key = "error" if "error" in body else ("detail" if "detail" in body else None)
            return key is not None, "4xx body lacks an error field: %r" % body
        run("http-error-schema", error_schema)

        def health():
            resp = requests.get(base_url.rstrip("/") + "/v1/health", timeout=10)
            if resp.status_code != 200:
                return False, "health answered %d" % resp.status_code
            body = resp.json()
            return "models" in body, "health body lacks model identities: %r" % body
        run("http-health", health)

    return checks


def suite_for_url(base_url):
    """Backend suite where every role is served by the same sidecar URL."""
    ep = BackendEndpoint(base_url=base_url)
    return BackendSuite(victim=HttpBackend(ep), aux=HttpBackend(ep),
                        mlm=HttpBackend(ep), sim=HttpBackend(ep),
                        perceptual=HttpBackend(ep))


def _kendall_tau(xs, ys):
    n = len(xs)
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            a = (xs[i] - xs[j]) * (ys[i] - ys[j])
            if a > 0:
                concordant += 1
            elif a < 0:
                discordant += 1
    total = n * (n - 1) / 2
    return (concordant - discordant) / total if total else 0.0


def perceptual_rank_agreement(remote_backend, render_cfg, chars, n_pairs=100, seed=17):
    """Kendall tau between the built-in surrogate and a remote perceptual
    metric over random glyph pairs.

    Meaningful as a surrogate-quality check when the remote side is a
    learned perceptual metric; against another hand-built stand-in it only
    sanity-checks that the two rank broadly alike.
    """
    from .glyph import render_char
    from .metrics import msssim

    rng = np.random.default_rng(seed)
    pool = list(chars)
    surrogate, remote = [], []
    while len(surrogate) < n_pairs:
        a, b = rng.choice(pool, size=2, replace=False)
        ba, bb = render_char(str(a), render_cfg), render_char(str(b), render_cfg)
        surrogate.append(msssim(ba, bb))
        remote.append(remote_backend.perceptual(ba, bb))
    return _kendall_tau(surrogate, remote)
