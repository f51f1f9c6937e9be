"""Model backends for the sidecar.

Two families:

  * BuiltinBackend: deterministic, dependency-light stand-ins (lexicon
    translator, frequency masked LM, hashed char-n-gram embeddings,
    Gaussian-window SSIM perceptual metric).  Always available; useful for
    protocol testing and offline environments.  Identities are reported
    honestly via /v1/health as builtin/... names.

  * TransformersBackend: the real setup (Marian translators, a BERT masked
    LM, a MiniLM sentence embedder, LPIPS if installed).  Models load
    lazily on first use with greedy/deterministic decoding so repeated
    requests are stable.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np


class UnrenderableError(ValueError):
    """Payload image cannot be decoded."""


def decode_png_b64(blob):
    import base64
    import io

    from PIL import Image
    try:
        raw = base64.b64decode(blob, validate=True)
        img = Image.open(io.BytesIO(raw)).convert("L")
        return np.asarray(img, dtype=np.float64) / 255.0
    except Exception as exc:
        raise UnrenderableError("cannot decode PNG payload: %s" % exc) from exc


# ---------------------------------------------------------------------------
# builtin
# ---------------------------------------------------------------------------

def _gaussian_kernel(size=11, sigma=1.5):
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    k = np.exp(-(ax ** 2) / (2.0 * sigma ** 2))
    k /= k.sum()
    return np.outer(k, k)


def _filter2(img, kernel):
    # valid-mode correlation; the kernel is symmetric so this equals
    # convolution without pulling in scipy
    windows = np.lib.stride_tricks.sliding_window_view(img, kernel.shape)
    return np.einsum("ijkl,kl->ij", windows, kernel)


def gaussian_ssim(a, b, sigma=1.5, size=11):
    """Gaussian-weighted SSIM, the builtin perceptual metric.

    Deliberately a different formulation from the attack side's uniform
    window / multiscale surrogate, so rank-agreement checks between the
    two have something real to compare.
    """
    if a.shape != b.shape:
        raise UnrenderableError("image shapes differ: %s vs %s" % (a.shape, b.shape))
    size = min(size, a.shape[0], a.shape[1])
    if size % 2 == 0:
        size -= 1
    if size < 3:
        raise UnrenderableError("images too small for the %dx%d window" % (size, size))
    k = _gaussian_kernel(size, sigma)
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    mu_a = _filter2(a, k)
    mu_b = _filter2(b, k)
    saa = _filter2(a * a, k) - mu_a * mu_a
    sbb = _filter2(b * b, k) - mu_b * mu_b
    sab = _filter2(a * b, k) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * sab + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (saa + sbb + c2)
    return float(np.mean(num / den))


class BuiltinBackend:
    """Deterministic stand-in models behind the full protocol."""

    def __init__(self, cfg):
        with open(cfg.lexicon_path, encoding="utf-8") as fh:
            data = json.load(fh)
        self.lexicon = data["lexicon"]
        self.frequencies = data.get("frequencies", {})
        self._total = float(sum(self.frequencies.values())) or 1.0
        self._reverse = {}
        for s, t in self.lexicon.items():
            self._reverse.setdefault(t, s)
        self.src_lang = cfg.src_lang
        self.tgt_lang = cfg.tgt_lang
        self._word_lens = sorted({len(w) for w in self.lexicon}, reverse=True)

    def identities(self):
        return {"victim": "builtin/lexicon-translator",
                "aux": "builtin/lexicon-translator",
                "mlm": "builtin/frequency-mlm",
                "sim": "builtin/char-ngram-hash-cosine",
                "perceptual": "builtin/gaussian-ssim-11x1.5"}

    # -- translate ----------------------------------------------------------

    def _segment(self, text):
        out = []
        i = 0
        while i < len(text):
            for ln in self._word_lens:
                if text[i:i + ln] in self.lexicon:
                    out.append(text[i:i + ln])
                    i += ln
                    break
            else:
                out.append(text[i])
                i += 1
        return out

    def translate(self, text, src, tgt):
        if src == self.src_lang and tgt == self.tgt_lang:
            return " ".join(self.lexicon.get(w, w) for w in self._segment(text))
        if src == self.tgt_lang and tgt == self.src_lang:
            return "".join(self._reverse.get(w, w) for w in text.split())
        raise ValueError("unsupported direction %s->%s" % (src, tgt))

    # -- masked LM ----------------------------------------------------------

    def mlm_scores(self, tokens):
        return [self.frequencies.get(t, 0) / self._total for t in tokens]

    # -- sentence similarity --------------------------------------------------

    @staticmethod
    def _embed(text, dim=256):
        vec = np.zeros(dim, dtype=np.float64)
        for n in (1, 2, 3):
            for i in range(len(text) - n + 1):
                gram = text[i:i + n]
                h = int.from_bytes(hashlib.blake2b(gram.encode("utf-8"),
                                                   digest_size=8).digest(), "big")
                vec[h % dim] += 1.0
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec

    def sent_sim(self, a, b):
        return float(np.dot(self._embed(a), self._embed(b)))

    # -- perceptual ------------------------------------------------------------

    def perceptual(self, img_a, img_b):
        # distance-free similarity orientation: 1.0 for identical images
        return gaussian_ssim(img_a, img_b)


# ---------------------------------------------------------------------------
# transformers
# ---------------------------------------------------------------------------

class TransformersBackend:
    """Real models, loaded lazily, decoded deterministically (greedy)."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.models = cfg.models
        self._cache = {}

    def identities(self):
        return dict(self.models)

    def _marian(self, name):
        if name not in self._cache:
            from transformers import MarianMTModel, MarianTokenizer
            tok = MarianTokenizer.from_pretrained(name)
            model = MarianMTModel.from_pretrained(name).to(self.cfg.device).eval()
            self._cache[name] = (tok, model)
        return self._cache[name]

    def translate(self, text, src, tgt):
        import torch
        if src == self.cfg.src_lang and tgt == self.cfg.tgt_lang:
            name = self.models["victim"]
        elif src == self.cfg.tgt_lang and tgt == self.cfg.src_lang:
            name = self.models["aux"]
        else:
            raise ValueError("unsupported direction %s->%s" % (src, tgt))
        tok, model = self._marian(name)
        with torch.no_grad():
            batch = tok([text], return_tensors="pt", truncation=True).to(self.cfg.device)
            out = model.generate(**batch, num_beams=1, do_sample=False,
                                 max_new_tokens=512)
        return tok.decode(out[0], skip_special_tokens=True)

    def mlm_scores(self, tokens):
        import torch
        if "mlm" not in self._cache:
            from transformers import AutoModelForMaskedLM, AutoTokenizer
            tok = AutoTokenizer.from_pretrained(self.models["mlm"])
            model = AutoModelForMaskedLM.from_pretrained(self.models["mlm"]) \
                .to(self.cfg.device).eval()
            self._cache["mlm"] = (tok, model)
        tok, model = self._cache["mlm"]
        scores = []
        with torch.no_grad():
            for i, word in enumerate(tokens):
                masked = list(tokens)
                masked[i] = tok.mask_token
                enc = tok(" ".join(masked), return_tensors="pt").to(self.cfg.device)
                mask_pos = (enc.input_ids[0] == tok.mask_token_id).nonzero()
                if len(mask_pos) == 0:
                    scores.append(0.0)
                    continue
                logits = model(**enc).logits[0, int(mask_pos[0])]
                probs = torch.softmax(logits, dim=-1)
                word_ids = tok(word, add_special_tokens=False).input_ids
                p = float(probs[word_ids[0]]) if word_ids else 0.0
                scores.append(p)
        return scores

    def sent_sim(self, a, b):
        if "sim" not in self._cache:
            from sentence_transformers import SentenceTransformer
            self._cache["sim"] = SentenceTransformer(self.models["sim"],
                                                     device=self.cfg.device)
        model = self._cache["sim"]
        embs = model.encode([a, b], convert_to_numpy=True, normalize_embeddings=True)
        return float(np.dot(embs[0], embs[1]))

    def perceptual(self, img_a, img_b):
        if "perceptual" not in self._cache:
            try:
                import lpips
                import torch
                net = self.models["perceptual"].split("-", 1)[-1]
                self._cache["perceptual"] = ("lpips", lpips.LPIPS(net=net), torch)
            except ImportError:
                # honest fallback, reported via identities() override below
                self.models = dict(self.models)
                self.models["perceptual"] = "builtin/gaussian-ssim-11x1.5 (lpips unavailable)"
                self._cache["perceptual"] = ("ssim", None, None)
        kind, net, torch = self._cache["perceptual"]
        if kind == "ssim":
            return gaussian_ssim(img_a, img_b)
        if img_a.shape != img_b.shape:
            raise UnrenderableError("image shapes differ")
        def prep(x):
            t = torch.from_numpy(x.astype(np.float32) * 2.0 - 1.0)
            return t[None, None].repeat(1, 3, 1, 1)
        with torch.no_grad():
            dist = float(net(prep(img_a), prep(img_b)))
        return 1.0 - dist  # similarity orientation


def make_backend(cfg):
    if cfg.backend == "transformers":
        return TransformersBackend(cfg)
    return BuiltinBackend(cfg)
