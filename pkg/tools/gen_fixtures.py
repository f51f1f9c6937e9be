#!/usr/bin/env python3
"""Generate frozen oracle fixtures for the metric tests.

Writes three JSON files under tests/fixtures/:

  ssim_pairs.json       20 image pairs as uint8 grids plus the SSIM value
                        computed by scikit-image (uniform 7x7 window,
                        data_range 1.0) on grid/255.0

  bleu_pairs.json       50 hypothesis/reference token pairs plus the
                        smoothed sentence-BLEU value from an exact-fraction
                        reference implementation written independently of
                        the package (zero-count precisions get +0.1 on the
                        numerator, no-unigram-match scores 0)

  tokenizer_golden.json 50 English sentences with token lists; sentences
                        are only frozen when two rule-set transliterations
                        (the classic sed pipeline and the tokenizer rule
                        tables) agree exactly

Each file records the oracle identity.  Rerunning reproduces the same bytes.
"""

import json
import math
import os
import re

import numpy as np
from skimage.metrics import structural_similarity

OUT = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")


# ---------------------------------------------------------------------------
# deterministic pixel patterns (integer LCG, no numpy RNG version dependence)
# ---------------------------------------------------------------------------

def lcg_grid(seed, h, w):
    state = seed & 0xFFFFFFFF
    out = np.empty((h, w), dtype=np.uint8)
    for i in range(h):
        for j in range(w):
            state = (1103515245 * state + 12345) & 0x7FFFFFFF
            out[i, j] = (state >> 16) & 0xFF
    return out


def blob_grid(seed, h, w):
    """Smooth blobby pattern: sum of integer-parameter cosines, quantized."""
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    a = ((seed * 7919) % 13) / 3.0 + 0.7
    b = ((seed * 104729) % 11) / 3.0 + 0.9
    z = np.cos(xs / a + seed) + np.cos(ys / b - seed) + np.cos((xs + ys) / (a + b))
    z = (z - z.min()) / (z.max() - z.min())
    return np.round(z * 255).astype(np.uint8)


def gen_ssim_pairs():
    pairs = []

    def add(name, ga, gb):
        a = ga.astype(np.float64) / 255.0
        b = gb.astype(np.float64) / 255.0
        val = structural_similarity(a, b, win_size=7, data_range=1.0,
                                    gaussian_weights=False)
        pairs.append({"name": name, "a": ga.tolist(), "b": gb.tolist(),
                      "ssim": float(val)})

    add("identical-noise", lcg_grid(1, 24, 24), lcg_grid(1, 24, 24))
    add("noise-vs-noise", lcg_grid(2, 24, 24), lcg_grid(3, 24, 24))
    add("noise-vs-inverted", lcg_grid(4, 24, 24), 255 - lcg_grid(4, 24, 24))
    add("blob-identical", blob_grid(5, 24, 24), blob_grid(5, 24, 24))
    add("blob-vs-blob", blob_grid(6, 24, 24), blob_grid(7, 24, 24))
    add("blob-vs-shifted", blob_grid(8, 24, 24), np.roll(blob_grid(8, 24, 24), 2, axis=1))
    add("blob-vs-noisy", blob_grid(9, 24, 24),
        np.clip(blob_grid(9, 24, 24).astype(int) + (lcg_grid(9, 24, 24) // 8) - 16, 0, 255).astype(np.uint8))
    add("flat-vs-flat", np.full((24, 24), 80, np.uint8), np.full((24, 24), 200, np.uint8))
    add("wide-identical", blob_grid(10, 24, 96), blob_grid(10, 24, 96))
    add("wide-blob-pair", blob_grid(11, 24, 96), blob_grid(12, 24, 96))
    add("wide-noise-pair", lcg_grid(13, 24, 96), lcg_grid(14, 24, 96))
    add("tall-blob-pair", blob_grid(15, 48, 24), blob_grid(16, 48, 24))
    add("box-vs-box", _box(24, 4, 4, 20, 20), _box(24, 6, 6, 18, 18))
    add("box-vs-cross", _box(24, 4, 4, 20, 20), _cross(24))
    add("blob-vs-blob-2", blob_grid(17, 32, 32), blob_grid(18, 32, 32))
    add("blob-vs-scaledint", blob_grid(19, 24, 24), (blob_grid(19, 24, 24) // 2))
    add("noise-vs-blob", lcg_grid(20, 24, 24), blob_grid(20, 24, 24))
    add("blob-vs-offset", blob_grid(21, 24, 24),
        np.clip(blob_grid(21, 24, 24).astype(int) + 40, 0, 255).astype(np.uint8))
    add("checker-vs-checker", _checker(24, 2), _checker(24, 3))
    add("blob-wide-shift", blob_grid(22, 24, 72), np.roll(blob_grid(22, 24, 72), 5, axis=1))
    return {"oracle": "scikit-image structural_similarity win_size=7 "
                      "gaussian_weights=False data_range=1.0 on grid/255.0",
            "pairs": pairs}


def _box(n, y0, x0, y1, x1):
    g = np.zeros((n, n), np.uint8)
    g[y0:y1, x0:x1] = 255
    return g


def _cross(n):
    g = np.zeros((n, n), np.uint8)
    g[n // 2 - 2:n // 2 + 2, :] = 255
    g[:, n // 2 - 2:n // 2 + 2] = 255
    return g


def _checker(n, k):
    ys, xs = np.mgrid[0:n, 0:n]
    return (((ys // k + xs // k) % 2) * 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# BLEU oracle: exact-fraction reference implementation
# ---------------------------------------------------------------------------

def oracle_bleu(hypothesis, references):
    """Smoothed sentence BLEU-4, written for clarity over speed.

    Modified precision per n: for every distinct n-gram of the hypothesis,
    count its occurrences by explicit position scan and clip against the
    maximum count over the references.  Numerator and denominator are kept
    as plain ints (the smoothing divides epsilon by the real denominator,
    so the fraction must stay unreduced); the combine step uses float
    log/exp like any practical implementation.
    """
    def grams(seq, n):
        return [tuple(seq[i:i + n]) for i in range(len(seq) - n + 1)]

    precisions = []
    for n in range(1, 5):
        hyp_ngrams = grams(hypothesis, n)
        clipped = 0
        for g in set(hyp_ngrams):
            hyp_count = sum(1 for x in hyp_ngrams if x == g)
            ref_count = max((sum(1 for x in grams(r, n) if x == g) for r in references),
                            default=0)
            clipped += min(hyp_count, ref_count)
        precisions.append((clipped, max(1, len(hyp_ngrams))))

    if precisions[0][0] == 0:
        return 0.0

    hyp_len = len(hypothesis)
    ref_len = min((len(r) for r in references),
                  key=lambda rl: (abs(rl - hyp_len), rl))
    if hyp_len > ref_len:
        bp = 1.0
    elif hyp_len == 0:
        bp = 0.0
    else:
        bp = math.exp(1.0 - ref_len / hyp_len)

    total = 0.0
    for numerator, denominator in precisions:
        if numerator == 0:
            val = (numerator + 0.1) / denominator
        else:
            val = numerator / denominator
        total += 0.25 * math.log(val)
    return bp * math.exp(total)


_WORDS = ("the cat sat on a mat big dog ran fast small bird flew over green "
          "tree old man walked slowly under bright sun young girl read new "
          "book near quiet river".split())


def gen_bleu_pairs():
    state = [12345]

    def rnd(n):
        state[0] = (1103515245 * state[0] + 12345) & 0x7FFFFFFF
        return state[0] % n

    cases = []

    def add(hyp, refs):
        cases.append({"hypothesis": hyp, "references": refs,
                      "bleu": oracle_bleu(hyp, refs)})

    add("the cat sat".split(), ["the cat sat on the mat".split()])
    add("the cat sat on the mat".split(), ["the cat sat on the mat".split()])
    add([], ["the cat".split()])
    add("dog".split(), ["dog".split()])
    add("xyzzy plugh".split(), ["the cat sat".split()])
    add("the the the the".split(), ["the cat".split()])
    add("the cat the cat sat sat".split(), ["the cat sat".split()])
    # multiple references
    add("the small dog ran".split(),
        ["a small dog ran fast".split(), "the big dog walked".split()])
    add("a b c d e".split(), ["a b c d e f g".split(), "a b c".split()])
    while len(cases) < 50:
        ref_len = 4 + rnd(9)
        ref = [_WORDS[rnd(len(_WORDS))] for _ in range(ref_len)]
        hyp = list(ref)
        for _ in range(rnd(4)):
            hyp[rnd(len(hyp))] = _WORDS[rnd(len(_WORDS))]
        if rnd(3) == 0:
            hyp = hyp[:max(1, len(hyp) - rnd(3))]
        if rnd(4) == 0:
            hyp.insert(rnd(len(hyp) + 1), _WORDS[rnd(len(_WORDS))])
        add(hyp, [ref])
    return {"oracle": "exact-fraction reference implementation (clip by "
                      "position scan), +0.1 numerator on zero counts, "
                      "0.0 on zero unigram matches",
            "pairs": cases}


# ---------------------------------------------------------------------------
# Tokenizer golden: freeze only where two rule transliterations agree
# ---------------------------------------------------------------------------

def sed_style_tokenize(text):
    """Transliteration of the classic Treebank sed pipeline, amended with
    the digit-aware comma/colon handling used by its library descendants."""
    s = text
    s = re.sub(r"^\"", r"`` ", s)
    s = re.sub(r"([ \(\[{<])\"", r"\1 `` ", s)
    s = re.sub(r"\.\.\.", r" ... ", s)
    s = re.sub(r"([:,])([^\d])", r" \1 \2", s)
    s = re.sub(r"([:,])$", r" \1 ", s)
    s = re.sub(r"[;@#$%&]", lambda m: " " + m.group(0) + " ", s)
    s = re.sub(r"([^\.])(\.)([\]\)}>\"']*)[ ]*$", r"\1 \2\3 ", s)
    s = re.sub(r"[?!]", lambda m: " " + m.group(0) + " ", s)
    s = re.sub(r"([^'])' ", r"\1 ' ", s)
    s = re.sub(r"[\]\[\(\)\{\}\<\>]", lambda m: " " + m.group(0) + " ", s)
    s = re.sub(r"--", r" -- ", s)
    s = " " + s + " "
    s = re.sub(r"\"", r" '' ", s)
    s = re.sub(r"(\S)('')", r"\1 \2 ", s)
    s = re.sub(r"([^' ])('[sSmMdD]) ", r"\1 \2 ", s)
    s = re.sub(r"([^' ])('ll|'LL|'re|'RE|'ve|'VE|n't|N'T) ", r"\1 \2 ", s)
    for pat in (r"\b(can)(not)\b", r"\b(d)('ye)\b", r"\b(gim)(me)\b",
                r"\b(gon)(na)\b", r"\b(got)(ta)\b", r"\b(lem)(me)\b",
                r"\b(more)('n)\b", r"\b(wan)(na) "):
        s = re.sub(pat, r" \1 \2 ", s, flags=re.IGNORECASE)
    for pat in (r" ('t)(is)\b", r" ('t)(was)\b"):
        s = re.sub(pat, r" \1 \2 ", s, flags=re.IGNORECASE)
    return s.split()


_SENTENCES = [
    "Hello, world.",
    "The cat sat on the mat.",
    "I can't believe it works!",
    "Don't stop now.",
    "She said it's fine.",
    "They're coming home tonight.",
    "We've been here before.",
    "You'll see the results soon.",
    "He'd rather stay home.",
    "I'm not sure about that.",
    "The model translates text; the attack degrades it.",
    "Is this the right answer?",
    "What a strange result!",
    "The score was high (almost perfect).",
    "Results are listed in table form.",
    "First, render the text.",
    "Second, build the index.",
    "Then run the attack pipeline.",
    "The quick brown fox jumps over the lazy dog.",
    "A sentence without any punctuation marks at all",
    "Costs rose sharply; profits fell.",
    "The output -- surprisingly -- matched.",
    "He asked: was it reproducible?",
    "Words, words, words.",
    "The test suite covers every module.",
    "Rendering is deterministic.",
    "Cannot is split by the tokenizer.",
    "I wanna see the report now.",
    "They gonna finish it today.",
    "The glyph looks identical to the original.",
    "Two sentences differ in exactly one character.",
    "Translation quality dropped by half.",
    "The index stores one vector per character.",
    "Character cells are twenty-four pixels wide.",
    "Every replacement is audited afterwards.",
    "The reference translation stays fixed.",
    "Some attacks fail on robust inputs.",
    "The constraint uses a strict inequality.",
    "Scores range between zero and one.",
    "Reports round-trip through CSV and JSON.",
    "A blank glyph has no usable direction.",
    "The fallback chain is deterministic.",
    "Masked words carry importance scores.",
    "Rare words are attacked first.",
    "The victim model never sees the plan.",
    "Padding aligns sentences of unequal width.",
    "It's done!",
    "Wait, what happened here?",
    "The harness excludes zero-baseline rows.",
    "Final selection minimizes source similarity.",
    "Nothing else changed.",
    "That's all, folks.",
    "Let's run it again.",
    "The gate reverts offending replacements.",
]


def gen_tokenizer_golden():
    import sys
    sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))
    from glyphattack.evalharness import tokenize_en

    entries = []
    for s in _SENTENCES:
        a = tokenize_en(s)
        b = sed_style_tokenize(s)
        if a == b:
            entries.append({"text": s, "tokens": a})
        else:
            print("DISAGREE, dropped: %r\n  tables: %r\n  sed:    %r" % (s, a, b))
    entries = entries[:50]
    if len(entries) < 50:
        raise SystemExit("only %d agreeing sentences, need 50" % len(entries))
    return {"oracle": "agreement of two rule-set transliterations "
                      "(tokenizer rule tables vs classic sed pipeline)",
            "sentences": entries}


def main():
    os.makedirs(OUT, exist_ok=True)
    for name, payload in (("ssim_pairs.json", gen_ssim_pairs()),
                          ("bleu_pairs.json", gen_bleu_pairs()),
                          ("tokenizer_golden.json", gen_tokenizer_golden())):
        path = os.path.join(OUT, name)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False, indent=1, sort_keys=True)
            fh.write("\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
