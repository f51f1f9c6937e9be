"""Similarity and quality metrics.

Pixel metrics (mse / cosine / ssim / multiscale ssim) operate on GlyphBitmap
pairs of equal dimensions.  All perceptual scores are similarity-oriented:
higher means more alike, so thresholds read "score > theta".  Distances from
remote backends are mapped through 1 - d before they get here.

The sentence-level perceptual score combines a global term over the full
sentence renders with an epsilon-weighted sum of per-character terms.  For
unreplaced characters the per-character term is the maximal-similarity
constant 1.0, so the sum is computed analytically over replaced positions
only; the result is numerically identical to summing every character.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

from .errors import (DimMismatchError, EmptyReferenceError, LengthMismatchError,
                     TooSmallError, ZeroVectorError)
from .glyph import GlyphBitmap, render_char, render_sentence

SSIM_WINDOW = 7
SSIM_K1 = 0.01
SSIM_K2 = 0.03
MAX_SIMILARITY = 1.0  # value of the per-char term for an unchanged character

# Standard five-scale weights; renormalized when the image only supports
# fewer scales at the 7px window.
_MSSSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)

SURROGATE_METRIC_ID = "msssim-surrogate/v1"


def _check_dims(a, b):
    if a.pixels.shape != b.pixels.shape:
        raise DimMismatchError("bitmap shapes differ: %s vs %s"
                               % (a.pixels.shape, b.pixels.shape))


def mse(a: GlyphBitmap, b: GlyphBitmap) -> float:
    """Mean of squared per-pixel differences."""
    _check_dims(a, b)
    x = a.pixels.astype(np.float64)
    y = b.pixels.astype(np.float64)
    return float(np.mean((x - y) ** 2))


def cosine(a: GlyphBitmap, b: GlyphBitmap) -> float:
    """Cosine of the mean-centered flattened pixel vectors.

    Centering removes the DC component so that two mostly-background cells
    are not trivially similar; it also makes the score invariant to a
    uniform intensity shift of either operand.
    """
    _check_dims(a, b)
    va = a.pixels.astype(np.float64).reshape(-1)
    vb = b.pixels.astype(np.float64).reshape(-1)
    va = va - va.mean()
    vb = vb - vb.mean()
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na < 1e-12 or nb < 1e-12:
        raise ZeroVectorError("blank glyph: centered pixel vector is zero")
    return float(np.dot(va, vb) / (na * nb))


def _ssim_parts(x, y, data_range=1.0):
    """Per-pixel SSIM map pieces under a uniform window.

    Follows the standard formulation: 7x7 uniform filter, unbiased sample
    covariance, C1=(K1*L)^2, C2=(K2*L)^2.  Returns (ssim_map, cs_map).
    """
    win = SSIM_WINDOW
    np_win = win * win
    cov_norm = np_win / (np_win - 1.0)
    ux = uniform_filter(x, size=win)
    uy = uniform_filter(y, size=win)
    uxx = uniform_filter(x * x, size=win)
    uyy = uniform_filter(y * y, size=win)
    uxy = uniform_filter(x * y, size=win)
    vx = cov_norm * (uxx - ux * ux)
    vy = cov_norm * (uyy - uy * uy)
    vxy = cov_norm * (uxy - ux * uy)
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    a1 = 2.0 * ux * uy + c1
    a2 = 2.0 * vxy + c2
    b1 = ux * ux + uy * uy + c1
    b2 = vx + vy + c2
    return (a1 * a2) / (b1 * b2), a2 / b2


def _crop_mean(m):
    pad = (SSIM_WINDOW - 1) // 2
    return float(m[pad:m.shape[0] - pad, pad:m.shape[1] - pad].mean(dtype=np.float64))


def ssim(a: GlyphBitmap, b: GlyphBitmap) -> float:
    """Mean local structural similarity over a 7x7 sliding window."""
    _check_dims(a, b)
    if min(a.pixels.shape) < SSIM_WINDOW:
        raise TooSmallError("bitmap %sx%s smaller than the %d px SSIM window"
                            % (a.height, a.width, SSIM_WINDOW))
    x = a.pixels.astype(np.float64)
    y = b.pixels.astype(np.float64)
    smap, _ = _ssim_parts(x, y)
    return _crop_mean(smap)


def _downsample2(x):
    h, w = x.shape
    x = x[:h // 2 * 2, :w // 2 * 2]
    return 0.25 * (x[0::2, 0::2] + x[1::2, 0::2] + x[0::2, 1::2] + x[1::2, 1::2])


def msssim(a: GlyphBitmap, b: GlyphBitmap) -> float:
    """Multiscale SSIM, the built-in perceptual surrogate.

    Uses as many of the standard five scales as the image height/width
    allows at the 7px window, with the scale weights renormalized.
    Negative contrast-structure terms are clamped at zero.
    """
    _check_dims(a, b)
    if min(a.pixels.shape) < SSIM_WINDOW:
        raise TooSmallError("bitmap %sx%s smaller than the %d px SSIM window"
                            % (a.height, a.width, SSIM_WINDOW))
    x = a.pixels.astype(np.float64)
    y = b.pixels.astype(np.float64)
    levels = 1
    h, w = x.shape
    while levels < len(_MSSSIM_WEIGHTS) and min(h, w) // 2 >= SSIM_WINDOW:
        levels += 1
        h //= 2
        w //= 2
    weights = np.asarray(_MSSSIM_WEIGHTS[:levels], dtype=np.float64)
    weights = weights / weights.sum()
    terms = []
    for lv in range(levels):
        smap, csmap = _ssim_parts(x, y)
        if lv == levels - 1:
            terms.append(_crop_mean(smap))
        else:
            terms.append(_crop_mean(csmap))
            x = _downsample2(x)
            y = _downsample2(y)
    score = 1.0
    for t, wgt in zip(terms, weights):
        if t <= 0.0:
            return 0.0
        score *= t ** wgt
    return float(score)


def perceptual_similarity(a: GlyphBitmap, b: GlyphBitmap, backend=None):
    """Perceptual similarity between two renders, higher = more alike.

    With a remote perceptual backend configured its score is used (the
    backend maps its distance d to 1 - d before answering); otherwise the
    deterministic multiscale-SSIM surrogate.  Returns (score, metric_id) so
    callers can record which metric produced the number.
    """
    if backend is not None:
        _check_dims(a, b)
        return backend.perceptual(a, b), backend.perceptual_metric_id()
    return msssim(a, b), SURROGATE_METRIC_ID


@dataclass(frozen=True)
class PerceptualScore:
    """Combined sentence-level perceptual score (global + epsilon * local)."""

    global_term: float
    local_sum: float
    epsilon: float
    combined: float
    metric: str
    n_chars: int
    n_replaced: int

    def to_dict(self):
        return {"global_term": self.global_term, "local_sum": self.local_sum,
                "epsilon": self.epsilon, "combined": self.combined,
                "metric": self.metric, "n_chars": self.n_chars,
                "n_replaced": self.n_replaced}


def sentence_perceptual(x, x_delta, replaced, epsilon, cfg, backend=None) -> PerceptualScore:
    """Sentence perceptual score between x and its substituted variant.

    `replaced` lists (position, original_char, replacement_char) triples;
    substitution is the only edit allowed, so both sentences must have equal
    character length.  The local sum covers every character: unreplaced
    positions contribute the constant 1.0 (folded in analytically), replaced
    positions contribute the per-cell perceptual similarity.
    """
    if len(x) != len(x_delta):
        raise LengthMismatchError("sentence lengths differ: %d vs %d"
                                  % (len(x), len(x_delta)))
    for pos, orig, repl in replaced:
        if not (0 <= pos < len(x)) or x[pos] != orig or x_delta[pos] != repl:
            raise ValueError("replacement record (%d, %r, %r) does not match the texts"
                             % (pos, orig, repl))
    listed = {pos for pos, _, _ in replaced}
    for i, (ca, cb) in enumerate(zip(x, x_delta)):
        if ca != cb and i not in listed:
            raise ValueError("texts differ at unlisted position %d" % i)

    global_term, metric = perceptual_similarity(
        render_sentence(x, cfg), render_sentence(x_delta, cfg), backend)
    local = float(len(x) - len(replaced)) * MAX_SIMILARITY
    for _, orig, repl in replaced:
        score, _ = perceptual_similarity(render_char(orig, cfg),
                                         render_char(repl, cfg), backend)
        local += score
    return PerceptualScore(global_term=global_term, local_sum=local,
                           epsilon=epsilon,
                           combined=global_term + epsilon * local,
                           metric=metric, n_chars=len(x),
                           n_replaced=len(replaced))


def pad_to_width(bitmap: GlyphBitmap, width, fill=0.0) -> GlyphBitmap:
    """Right-pad a bitmap with background so unequal sentences can be compared."""
    if bitmap.width >= width:
        return bitmap
    pad = np.full((bitmap.height, width - bitmap.width), fill, dtype=bitmap.pixels.dtype)
    return GlyphBitmap(pixels=np.hstack([bitmap.pixels, pad]), text=bitmap.text)


# --------------------------------------------------------------------------
# BLEU
# --------------------------------------------------------------------------

BLEU_SMOOTHING_ID = "sentence-bleu4/add-eps-0.1-on-zero"
_BLEU_EPS = 0.1


@dataclass(frozen=True)
class BleuScore:
    value: float
    precisions: tuple  # raw modified n-gram precisions, n = 1..4
    smoothing: str = BLEU_SMOOTHING_ID

    def to_dict(self):
        return {"value": self.value, "precisions": list(self.precisions),
                "smoothing": self.smoothing}


def _ngram_counts(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _modified_precision(hypothesis, references, n):
    hyp_counts = _ngram_counts(hypothesis, n)
    max_ref = Counter()
    for ref in references:
        for ng, c in _ngram_counts(ref, n).items():
            if c > max_ref[ng]:
                max_ref[ng] = c
    clipped = sum(min(c, max_ref[ng]) for ng, c in hyp_counts.items())
    total = max(1, sum(hyp_counts.values()))
    return clipped, total


def _closest_ref_len(references, hyp_len):
    return min((len(r) for r in references),
               key=lambda rl: (abs(rl - hyp_len), rl))


def bleu(hypothesis, references) -> BleuScore:
    """Sentence-level smoothed BLEU-4.

    Tokenization is the caller's job.  Zero-count n-gram precisions are
    smoothed by adding 0.1 to the numerator; a hypothesis with no unigram
    match at all scores 0.  Equal token sequences score exactly 1.0.
    """
    if not references or all(len(r) == 0 for r in references):
        raise EmptyReferenceError("BLEU needs at least one non-empty reference")
    hyp_len = len(hypothesis)
    nums, dens = [], []
    for n in range(1, 5):
        num, den = _modified_precision(hypothesis, references, n)
        nums.append(num)
        dens.append(den)
    raw = tuple(n / d for n, d in zip(nums, dens))
    if nums[0] == 0:
        return BleuScore(value=0.0, precisions=raw)
    ref_len = _closest_ref_len(references, hyp_len)
    if hyp_len > ref_len:
        bp = 1.0
    elif hyp_len == 0:
        bp = 0.0
    else:
        bp = math.exp(1.0 - ref_len / hyp_len)
    log_sum = 0.0
    for num, den in zip(nums, dens):
        p = (num + _BLEU_EPS) / den if num == 0 else num / den
        log_sum += 0.25 * math.log(p)
    return BleuScore(value=bp * math.exp(log_sum), precisions=raw)


def corpus_bleu(pairs) -> float:
    """Corpus-level BLEU-4 over (hypothesis, references) pairs.

    Aggregates n-gram counts across the corpus before taking precisions,
    with the same add-epsilon smoothing on zero numerators.
    """
    nums = [0, 0, 0, 0]
    dens = [0, 0, 0, 0]
    hyp_total = 0
    ref_total = 0
    seen = False
    for hypothesis, references in pairs:
        if not references or all(len(r) == 0 for r in references):
            raise EmptyReferenceError("BLEU needs at least one non-empty reference")
        seen = True
        for i, n in enumerate(range(1, 5)):
            num, den = _modified_precision(hypothesis, references, n)
            nums[i] += num
            dens[i] += den
        hyp_total += len(hypothesis)
        ref_total += _closest_ref_len(references, len(hypothesis))
    if not seen or nums[0] == 0:
        return 0.0
    if hyp_total > ref_total:
        bp = 1.0
    elif hyp_total == 0:
        bp = 0.0
    else:
        bp = math.exp(1.0 - ref_total / hyp_total)
    log_sum = 0.0
    for num, den in zip(nums, dens):
        p = (num + _BLEU_EPS) / den if num == 0 else num / den
        log_sum += 0.25 * math.log(p)
    return bp * math.exp(log_sum)
