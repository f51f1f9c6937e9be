#!/usr/bin/env python3
"""Scaled quantitative check against a live model sidecar.

Runs the full attack on a ~100-sentence Zh-En validation subsample through
real models served over HTTP (see server/, `transformers` backend) and
checks the scaled-down expectations: mean relative BLEU decrease >= 0.20
and mean render SSIM >= 0.90 at theta=0.95, r=0.2.

Needs assets that are not bundled (they are large and/or externally
licensed): a validation subsample TSV (`<source>\t<reference>` per line),
a pixel index built over a real CJK repertoire with a full CJK font, and a
radical decomposition table for that repertoire.

    python tools/scaled_check.py --sidecar http://127.0.0.1:8601 \
        --corpus wmt19_subsample.tsv --index cjk.idx --dict radicals.tsv \
        --font /path/to/cjk_font.ttf

Exit code 0 when both expectations hold, 3 when the run completed but an
expectation failed, 2 on setup errors (sidecar down, assets missing).
"""

import argparse
import sys

import requests


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sidecar", required=True, help="base URL of mt-model-server")
    ap.add_argument("--corpus", required=True, help="validation subsample TSV")
    ap.add_argument("--index", required=True, help="pixel index over a CJK repertoire")
    ap.add_argument("--dict", required=True, help="radical decomposition TSV")
    ap.add_argument("--font", action="append", required=True,
                    help="font file(s) matching the index geometry")
    ap.add_argument("--limit", type=int, default=100)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()

    from glyphattack import (AttackConfig, AttackContext, GlyphDictionary,
                             PixelIndex, RenderConfig, attack_corpus, evaluate)
    from glyphattack.bundled import load_corpus
    from glyphattack.models import BackendEndpoint, BackendSuite, HttpBackend
    from glyphattack.segment import LongestMatchSegmenter

    try:
        health = requests.get(args.sidecar.rstrip("/") + "/v1/health", timeout=10)
        health.raise_for_status()
    except Exception as exc:
        print("sidecar not reachable: %s" % exc, file=sys.stderr)
        return 2
    info = health.json()
    print("sidecar models:", info.get("models"))
    if str(info.get("models", {}).get("victim", "")).startswith("builtin/"):
        print("note: sidecar is serving builtin stand-ins, not the real "
              "translation models; the thresholds below are only meaningful "
              "against the transformers backend", file=sys.stderr)

    render = RenderConfig(font_paths=tuple(args.font))
    index = PixelIndex.load(args.index)
    if index.geometry_digest != render.digest():
        print("index geometry does not match the given fonts; rebuild with "
              "`glyphattack build-index`", file=sys.stderr)
        return 2
    dictionary = GlyphDictionary.load(args.dict)
    pairs = load_corpus(args.corpus)[:args.limit]
    # word list for segmentation: greedy longest match over the dictionary
    # keys plus per-char fallback; a dedicated segmenter lexicon can be
    # substituted here when available
    segmenter = LongestMatchSegmenter(dictionary.chars())

    ep = BackendEndpoint(base_url=args.sidecar, timeout_s=120.0)
    suite = BackendSuite(victim=HttpBackend(ep), aux=HttpBackend(ep),
                         mlm=HttpBackend(ep), sim=HttpBackend(ep),
                         perceptual=HttpBackend(ep))
    cfg = AttackConfig(theta=0.95, replacement_rate=0.2)
    ctx = AttackContext(config=cfg, render=render, backends=suite, index=index,
                        dictionary=dictionary, segmenter=segmenter,
                        backend_desc={"sidecar": args.sidecar})

    print("attacking %d sentences ..." % len(pairs))
    results = attack_corpus(pairs, ctx, workers=args.workers)
    report = evaluate([r.to_dict() for r in results], render, alpha=cfg.alpha)

    rel = [(r.bleu_clean - r.bleu_adv) / r.bleu_clean
           for r in report.rows if not r.baseline_zero]
    mean_rel = sum(rel) / len(rel) if rel else 0.0
    print("mean BLEU %.4f -> %.4f | mean relative decrease %.3f | "
          "ASR %.3f | mean SSIM %.4f | zero-baseline rows %d"
          % (report.mean_bleu_clean, report.mean_bleu_adv, mean_rel,
             report.asr, report.mean_ssim, report.zero_baseline_count))

    ok_rel = mean_rel >= 0.20
    ok_ssim = report.mean_ssim >= 0.90
    print("mean relative decrease >= 0.20:", "PASS" if ok_rel else "FAIL")
    print("mean SSIM >= 0.90:            ", "PASS" if ok_ssim else "FAIL")
    return 0 if (ok_rel and ok_ssim) else 3


if __name__ == "__main__":
    sys.exit(main())
