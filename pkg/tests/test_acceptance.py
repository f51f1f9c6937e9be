"""Acceptance suite: one test per acceptance criterion.

Each test prints a PASS/FAIL line (run with -s to see them live).  The
randomized-attack corpus is generated once per session and shared by the
constraint, gate, selection and audit criteria.
"""

import json
import random
import time

import numpy as np
import pytest

from glyphattack import (AttackConfig, AttackContext, RenderConfig,
                         attack_corpus, bleu, build_pixel_index, cosine, mse,
                         plan_replacements, run_attack, sentence_perceptual,
                         ssim)
from glyphattack.audit import verify_records
from glyphattack.bundled import (attack_segmenter, load_corpus, load_mock_model,
                                 load_radicals, mock_backend_suite, stub_charset)
from glyphattack.glyph import GlyphBitmap
from glyphattack.simindex import PixelIndex, pixel_candidates

from conftest import DEJAVU, FIXTURES, needs_dejavu


def report(name, passed, detail=""):
    line = "%s %s%s" % ("PASS" if passed else "FAIL", name,
                        (" [%s]" % detail) if detail else "")
    print("\nACCEPTANCE: " + line)
    assert passed, line


# ---------------------------------------------------------------------------
# shared randomized mock-corpus attacks
# ---------------------------------------------------------------------------

N_RANDOM_ATTACKS = 1000
_RATES = (0.08, 0.1, 0.2, 0.3, 0.5)


def _random_corpus(rng, lexicon, n):
    words = sorted(lexicon)
    pairs = []
    for _ in range(n):
        k = rng.randint(4, 9)
        chosen = [words[rng.randrange(len(words))] for _ in range(k)]
        src = "".join(chosen)
        glosses = [lexicon[w] for w in chosen]
        if rng.random() < 0.3:
            rng.shuffle(glosses)  # shuffled reference: back-translation != x
        pairs.append((src, " ".join(glosses)))
    return pairs


@pytest.fixture(scope="session")
def randomized_results():
    """(results, configs, elapsed_seconds) for ~1000 randomized attacks."""
    rng = random.Random(424242)
    render = RenderConfig()
    index = build_pixel_index(stub_charset(), render)
    radicals = load_radicals()
    segmenter = attack_segmenter()
    lexicon = load_mock_model()["lexicon"]
    suite = mock_backend_suite()

    per_rate = N_RANDOM_ATTACKS // len(_RATES)
    out = []
    t0 = time.monotonic()
    for rate in _RATES:
        cfg = AttackConfig(replacement_rate=rate)
        ctx = AttackContext(config=cfg, render=render, backends=suite,
                            index=index, dictionary=radicals,
                            segmenter=segmenter, debug_candidates=True)
        for src, ref in _random_corpus(rng, lexicon, per_rate):
            out.append((rate, run_attack(src, ref, ctx)))
    elapsed = time.monotonic() - t0
    assert len(out) >= N_RANDOM_ATTACKS
    return out, elapsed


def test_criterion_replacement_constraints(randomized_results):
    """Per-word cap and strict rate bound over >=1000 randomized attacks."""
    results, elapsed = randomized_results
    violations = []
    for rate, res in results:
        counts = {}
        for rep in res.plan:
            counts[rep.word_index] = counts.get(rep.word_index, 0) + 1
        if any(v > 1 for v in counts.values()):
            violations.append(("per-word", res.source))
        if res.plan and not (len(res.plan) / res.total_word_chars < rate):
            violations.append(("rate", res.source))
    ok = not violations and elapsed < 60.0
    report("replacement-constraint-suite", ok,
           "%d attacks, %d violations, %.1fs" % (len(results), len(violations), elapsed))


def test_criterion_perceptual_gate(randomized_results):
    """Recomputed combined score > theta for every emitted text; reverting
    any single surviving replacement never decreases the score."""
    results, _ = randomized_results
    render = RenderConfig()
    gate_violations = 0
    mono_violations = 0
    checked_mono = 0
    for rate, res in results:
        triples = [(r.position, r.original, r.replacement) for r in res.plan]
        score = sentence_perceptual(res.base, res.adversarial, triples,
                                    res.perceptual.epsilon, render)
        if res.plan and not (score.combined > res.config["theta"]):
            gate_violations += 1
        if checked_mono < 100 and res.plan:
            checked_mono += 1
            for drop in range(len(res.plan)):
                kept = [r for i, r in enumerate(res.plan) if i != drop]
                kept_text = res.base
                chars = list(res.base)
                for r in kept:
                    chars[r.position] = r.replacement
                kept_text = "".join(chars)
                kept_score = sentence_perceptual(
                    res.base, kept_text,
                    [(r.position, r.original, r.replacement) for r in kept],
                    res.perceptual.epsilon, render)
                if kept_score.combined < score.combined - 1e-12:
                    mono_violations += 1
    ok = gate_violations == 0 and mono_violations == 0 and checked_mono >= 100
    report("perceptual-gate-suite", ok,
           "gate violations %d, monotonicity violations %d over %d spot-checks"
           % (gate_violations, mono_violations, checked_mono))


def test_criterion_selection_rule(randomized_results):
    """Reported adversarial text minimizes source similarity among all
    logged candidates, on 100 sampled results."""
    results, _ = randomized_results
    sim = mock_backend_suite().sim
    sampled = [res for _, res in results if res.candidates_log][:100]
    bad = 0
    for res in sampled:
        sims = [c["candidate_sim"] for c in res.candidates_log]
        best_logged = min(sims + [sim.sent_sim(res.source, res.source)])
        if abs(res.sim_source_adversarial - best_logged) > 1e-12 \
                and res.sim_source_adversarial > best_logged:
            bad += 1
    ok = len(sampled) >= 100 and bad == 0
    report("final-selection-rule", ok, "%d/%d minimal" % (len(sampled) - bad, len(sampled)))


def test_criterion_constraint_audit(randomized_results):
    """Every recorded constraint clause re-verifies from the result dicts."""
    results, _ = randomized_results
    corpus_results = [res.to_dict() for _, res in results[:300]]
    clean, findings = verify_records(corpus_results)
    ok = clean == len(corpus_results) and not findings
    report("result-audit", ok, "%d/%d clean, %d findings"
           % (clean, len(corpus_results), len(findings)))


# ---------------------------------------------------------------------------
# index oracle equivalence
# ---------------------------------------------------------------------------

def _dejavu_repertoire(cfg, count):
    from fontTools.ttLib import TTFont
    tt = TTFont(DEJAVU, lazy=True)
    cps = sorted(tt.getBestCmap().keys())
    tt.close()
    out = []
    for cp in cps:
        if cp < 0x21:
            continue
        out.append(chr(cp))
        if len(out) == count:
            break
    return out


def _oracle_scan(index, cfg, char, m, k):
    """Brute-force top-m/top-k scan written independently of the index code.

    Follows the documented scoring contract: 8-bit quantized intensities,
    exact int64 sums, cosine = dot / (sqrt(na2) * sqrt(nb2)) over
    dim-scaled mean-centered vectors, mse = sse / (dim * 255^2).
    """
    from glyphattack import render_char
    q8 = np.rint(render_char(char, cfg).pixels.astype(np.float64).reshape(-1)
                 * 255.0).astype(np.int64)
    dim = q8.size
    v8 = np.rint(index.vectors.astype(np.float64) * 255.0).astype(np.int64)
    qc = dim * q8 - q8.sum()
    vc = dim * v8 - v8.sum(axis=1, keepdims=True)
    qn2 = int(qc @ qc)
    vn2 = np.einsum("ij,ij->i", vc, vc)
    dots = vc @ qc
    sims = dots.astype(np.float64) / (np.sqrt(vn2.astype(np.float64))
                                      * np.sqrt(np.float64(qn2)))
    rows = [(float(sims[i]), ch, i) for i, ch in enumerate(index.repertoire)
            if ch != char and vn2[i] > 0]
    rows.sort(key=lambda r: (-r[0], r[1]))
    top = rows[:m]
    rescored = []
    for cos_score, ch, i in top:
        d = v8[i] - q8
        sse = int(d @ d)
        rescored.append((sse / (dim * 255.0 * 255.0), ch, cos_score))
    rescored.sort(key=lambda r: (r[0], r[1]))
    return [(ch, ms, cs) for ms, ch, cs in rescored[:k]]


@needs_dejavu
def test_criterion_index_oracle_equivalence():
    t0 = time.monotonic()
    cfg = RenderConfig(font_paths=(DEJAVU,))
    repertoire_5k = _dejavu_repertoire(cfg, 5200)
    big = build_pixel_index(repertoire_5k, cfg, mode="exact")
    assert len(big) >= 5000

    small = PixelIndex(repertoire=big.repertoire[:2000],
                       vectors=big.vectors[:2000],
                       geometry_digest=big.geometry_digest, mode="exact")
    rng = np.random.default_rng(202406)
    queries = rng.choice(2000, size=200, replace=False)
    mismatches = 0
    for qi in queries:
        ch = small.repertoire[qi]
        got = pixel_candidates(ch, small, cfg, 50, 10)
        want = _oracle_scan(small, cfg, ch, 50, 10)
        got_list = [(c.char, c.mse, c.cosine) for c in got.candidates]
        if len(got_list) != len(want) or any(
                g[0] != w[0] or abs(g[1] - w[1]) > 1e-12 or abs(g[2] - w[2]) > 1e-9
                for g, w in zip(got_list, want)):
            mismatches += 1
    exact_ok = mismatches == 0

    accel = PixelIndex(repertoire=big.repertoire, vectors=big.vectors,
                       geometry_digest=big.geometry_digest, mode="accelerated")
    q2 = rng.choice(len(big), size=200, replace=False)
    hits = total = 0
    for qi in q2:
        ch = big.repertoire[qi]
        want = set(pixel_candidates(ch, big, cfg, 10, 10).chars())
        got = set(pixel_candidates(ch, accel, cfg, 10, 10).chars())
        hits += len(want & got)
        total += len(want)
    recall = hits / total
    elapsed = time.monotonic() - t0
    ok = exact_ok and recall >= 0.95 and elapsed < 300.0
    report("index-oracle-equivalence", ok,
           "exact mismatches %d/200, recall@10 %.4f on %d chars, %.1fs"
           % (mismatches, recall, len(big), elapsed))


# ---------------------------------------------------------------------------
# metric oracles
# ---------------------------------------------------------------------------

def test_criterion_metric_oracles():
    with open(FIXTURES + "/ssim_pairs.json") as fh:
        ssim_data = json.load(fh)
    ssim_bad = 0
    for pair in ssim_data["pairs"]:
        a = GlyphBitmap(np.asarray(pair["a"], dtype=np.float64) / 255.0, "a")
        b = GlyphBitmap(np.asarray(pair["b"], dtype=np.float64) / 255.0, "b")
        if abs(ssim(a, b) - pair["ssim"]) > 1e-6:
            ssim_bad += 1

    with open(FIXTURES + "/bleu_pairs.json") as fh:
        bleu_data = json.load(fh)
    bleu_bad = 0
    for pair in bleu_data["pairs"]:
        if abs(bleu(pair["hypothesis"], pair["references"]).value - pair["bleu"]) > 1e-9:
            bleu_bad += 1

    rng = np.random.default_rng(7)
    ident_bad = 0
    for _ in range(1000):
        arr = rng.random((24, 24))
        a = GlyphBitmap(arr, "r")
        if mse(a, a) != 0.0:
            ident_bad += 1
        if ssim(a, a) != 1.0:
            ident_bad += 1
        if abs(cosine(a, a) - 1.0) > 1e-12:
            ident_bad += 1
    ok = (ssim_bad == 0 and len(ssim_data["pairs"]) == 20
          and bleu_bad == 0 and len(bleu_data["pairs"]) == 50
          and ident_bad == 0)
    report("metric-oracles", ok,
           "ssim %d/20 bad, bleu %d/50 bad, identity %d/3000 bad"
           % (ssim_bad, bleu_bad, ident_bad))


# ---------------------------------------------------------------------------
# end-to-end mock attack
# ---------------------------------------------------------------------------

def test_criterion_end_to_end_mock():
    t0 = time.monotonic()
    render = RenderConfig()
    pairs = load_corpus()

    def one_run():
        ctx = AttackContext(config=AttackConfig(), render=render,
                            backends=mock_backend_suite(),
                            index=build_pixel_index(stub_charset(), render),
                            dictionary=load_radicals(),
                            segmenter=attack_segmenter())
        results = attack_corpus(pairs, ctx, workers=1)
        lines = [json.dumps(r.to_dict(), ensure_ascii=False) for r in results]
        return results, "\n".join(lines)

    results1, blob1 = one_run()
    results2, blob2 = one_run()
    asr = sum(r.success for r in results1) / len(results1)
    elapsed = time.monotonic() - t0
    ok = (len(results1) == 50 and asr >= 0.6 and blob1 == blob2
          and elapsed < 30.0)
    report("end-to-end-mock-attack", ok,
           "ASR %.3f, deterministic=%s, %.1fs" % (asr, blob1 == blob2, elapsed))
