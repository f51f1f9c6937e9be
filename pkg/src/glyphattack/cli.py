"""Command-line interface.

Subcommands: render, build-index, query-similar, attack, evaluate, audit,
selfcheck.  Exit codes: 0 success, 1 usage error, 2 runtime error.  All
diagnostics go to stderr; data goes to the files named by flags or stdout.

Configuration precedence is flag > config file > built-in default; pass
--explain-config to any subcommand that takes --config to see where each
value came from.  The config file is TOML with sections mirroring the
config field names ([attack], [render], [backends], [data]).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import bundled
from .attack import AttackConfig, AttackContext, attack_corpus
from .audit import verify_records
from .conformance import run_conformance
from .errors import GlyphAttackError
from .evalharness import evaluate, read_results_jsonl
from .glyph import RenderConfig, render_sentence
from .models import BackendEndpoint, BackendSuite, HttpBackend
from .simindex import (GlyphDictionary, PixelIndex, build_pixel_index,
                       merge_candidates, pixel_candidates, radical_candidates)

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print("%s: error: %s" % (self.prog, message), file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


# ---------------------------------------------------------------------------
# Config resolution: flag > config file > default
# ---------------------------------------------------------------------------

_ATTACK_FIELDS = ("alpha", "beta", "theta", "epsilon", "replacement_rate",
                  "top_m", "top_k", "importance_order", "fanout")
_RENDER_FIELDS = ("font_size", "cell_width", "cell_height")


def _load_config_file(path):
    if path is None:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _resolve(args, file_cfg):
    """Returns (attack_cfg, render_cfg, origins) honoring the precedence."""
    origins = {}
    attack_kwargs = {}
    file_attack = file_cfg.get("attack", {})
    for name in _ATTACK_FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            attack_kwargs[name] = flag
            origins[name] = "flag"
        elif name in file_attack:
            attack_kwargs[name] = file_attack[name]
            origins[name] = "config-file"
        else:
            origins[name] = "default"
    cfg = AttackConfig(**attack_kwargs)

    render_kwargs = {}
    file_render = file_cfg.get("render", {})
    fonts = getattr(args, "font", None)
    if fonts:
        render_kwargs["font_paths"] = tuple(fonts)
        origins["font_paths"] = "flag"
    elif "font_paths" in file_render:
        render_kwargs["font_paths"] = tuple(file_render["font_paths"])
        origins["font_paths"] = "config-file"
    else:
        origins["font_paths"] = "default"
    for name in _RENDER_FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            render_kwargs[name] = flag
            origins[name] = "flag"
        elif name in file_render:
            render_kwargs[name] = file_render[name]
            origins[name] = "config-file"
        else:
            origins[name] = "default"
    render = RenderConfig(**render_kwargs)
    return cfg, render, origins


def _explain(cfg, render, origins):
    print("resolved configuration (flag > config file > default):")
    for name in _ATTACK_FIELDS:
        print("  %-18s = %-12r (%s)" % (name, getattr(cfg, name), origins[name]))
    print("  %-18s = %r (%s)" % ("font_paths", list(render.font_paths), origins["font_paths"]))
    for name in _RENDER_FIELDS:
        print("  %-18s = %-12r (%s)" % (name, getattr(render, name), origins[name]))


def _add_config_flags(p):
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--explain-config", action="store_true",
                   help="print resolved config values and their origin, then exit")
    p.add_argument("--font", action="append", help="font file (repeatable, ordered fallback)")
    p.add_argument("--font-size", type=int, dest="font_size")
    p.add_argument("--cell-width", type=int, dest="cell_width")
    p.add_argument("--cell-height", type=int, dest="cell_height")
    for name in _ATTACK_FIELDS:
        flag = "--" + name.replace("_", "-")
        if name == "importance_order":
            p.add_argument(flag, choices=["asc", "desc"], dest=name)
        elif name in ("top_m", "top_k", "fanout"):
            p.add_argument(flag, type=int, dest=name)
        else:
            p.add_argument(flag, type=float, dest=name)


def _manifest(command, cfg_snapshot, artifacts, out_path):
    """Write the run manifest next to the output; returns its deterministic id."""
    canonical = json.dumps({"command": command, "config": cfg_snapshot,
                            "artifacts": artifacts}, sort_keys=True,
                           ensure_ascii=False)
    run_id = hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
    manifest = {"schema": "glyphattack-manifest/v1", "id": run_id,
                "command": command, "config": cfg_snapshot,
                "artifacts": artifacts, "written_at_unix": int(time.time())}
    path = out_path + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, ensure_ascii=False, indent=1, sort_keys=True)
        fh.write("\n")
    return run_id


def _file_sha(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_render(args):
    file_cfg = _load_config_file(args.config)
    cfg, render, origins = _resolve(args, file_cfg)
    if args.explain_config:
        _explain(cfg, render, origins)
        return 0
    bitmap = render_sentence(args.text, render)
    bitmap.save_png(args.out)
    print("wrote %s (%dx%d)" % (args.out, bitmap.width, bitmap.height), file=sys.stderr)
    return 0


def _read_repertoire(args, render):
    if args.repertoire:
        with open(args.repertoire, encoding="utf-8") as fh:
            text = fh.read()
        return [c for c in text if not c.isspace()]
    if args.range:
        lo, hi = args.range.split("-")
        return [chr(cp) for cp in range(int(lo, 16), int(hi, 16) + 1)
                if render.can_render(chr(cp))]
    return bundled.stub_charset()


def _cmd_build_index(args):
    file_cfg = _load_config_file(args.config)
    cfg, render, origins = _resolve(args, file_cfg)
    if args.explain_config:
        _explain(cfg, render, origins)
        return 0
    repertoire = _read_repertoire(args, render)
    index = build_pixel_index(repertoire, render, mode=args.mode)
    index.save(args.out)
    print("indexed %d chars (%d skipped) -> %s" %
          (len(index), len(index.skipped), args.out), file=sys.stderr)
    for ch, reason in index.skipped[:20]:
        print("  skipped U+%04X: %s" % (ord(ch), reason), file=sys.stderr)
    if len(index.skipped) > 20:
        print("  ... and %d more" % (len(index.skipped) - 20), file=sys.stderr)
    return 0


def _cmd_query_similar(args):
    file_cfg = _load_config_file(args.config)
    cfg, render, origins = _resolve(args, file_cfg)
    if args.explain_config:
        _explain(cfg, render, origins)
        return 0
    index = PixelIndex.load(args.index, mode=args.mode)
    m = args.top_m if args.top_m is not None else cfg.top_m
    k = args.top_k if args.top_k is not None else cfg.top_k
    m = min(m, len(index) - 1)
    k = min(k, m)
    pix = pixel_candidates(args.char, index, render, m, k)
    rad = set()
    if args.dict:
        rad = radical_candidates(args.char, GlyphDictionary.load(args.dict))
    merged = merge_candidates(args.char, rad, pix)
    print("candidates for %r (m=%d, k=%d):" % (args.char, m, k))
    for cand in merged.candidates:
        cosv = "%.6f" % cand.cosine if cand.cosine is not None else "-"
        msev = "%.6f" % cand.mse if cand.mse is not None else "-"
        print("  %s  source=%-4s cosine=%-10s mse=%s" % (cand.char, cand.source, cosv, msev))
    return 0


def _build_suite(args, file_cfg, cfg):
    backends_cfg = file_cfg.get("backends", {})
    mode = "mock" if args.mock else backends_cfg.get("mode", "mock")
    if mode == "mock":
        return bundled.mock_backend_suite(), bundled.attack_segmenter(), "mock"
    def ep(key):
        url = backends_cfg.get(key)
        if not url:
            raise GlyphAttackError("backends.%s missing from config file" % key)
        return BackendEndpoint(base_url=url)
    suite = BackendSuite(victim=HttpBackend(ep("victim_url")),
                         aux=HttpBackend(ep("aux_url")),
                         mlm=HttpBackend(ep("mlm_url")),
                         sim=HttpBackend(ep("sim_url")),
                         perceptual=HttpBackend(ep("perceptual_url"))
                         if backends_cfg.get("perceptual_url") else None,
                         src_lang=cfg.src_lang, tgt_lang=cfg.tgt_lang)
    desc = {k: v for k, v in backends_cfg.items() if k != "mode"}
    return suite, bundled.attack_segmenter(), desc


def _cmd_attack(args):
    file_cfg = _load_config_file(args.config)
    cfg, render, origins = _resolve(args, file_cfg)
    if args.explain_config:
        _explain(cfg, render, origins)
        return 0
    data_cfg = file_cfg.get("data", {})
    index_path = args.index or data_cfg.get("index")
    dict_path = args.dict or data_cfg.get("dictionary")

    if args.mock and not index_path:
        index = build_pixel_index(bundled.stub_charset(), render)
        index_desc = "bundled-stub-charset"
    elif index_path:
        index = PixelIndex.load(index_path)
        index_desc = {"path": index_path, "sha256": _file_sha(index_path)}
    else:
        raise GlyphAttackError(
            "no pixel index configured; build one first with "
            "`glyphattack build-index --out <file>` and pass --index")
    dictionary = (GlyphDictionary.load(dict_path) if dict_path
                  else bundled.load_radicals())

    suite, segmenter, backend_desc = _build_suite(args, file_cfg, cfg)
    ctx = AttackContext(config=cfg, render=render, backends=suite, index=index,
                        dictionary=dictionary, segmenter=segmenter,
                        debug_candidates=args.debug_candidates,
                        backend_desc=backend_desc)
    pairs = bundled.load_corpus(args.input)
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    results = attack_corpus(pairs, ctx, workers=workers)

    snapshot = cfg.snapshot(render, backend_desc)
    run_id = _manifest("attack", snapshot,
                       {"index": index_desc, "corpus": args.input}, args.out)
    with open(args.out, "w", encoding="utf-8") as fh:
        for res in results:
            d = res.to_dict()
            d["manifest"] = run_id
            fh.write(json.dumps(d, ensure_ascii=False) + "\n")
    n_success = sum(1 for r in results if r.success)
    print("attacked %d sentences, %d successful (ASR %.3f) -> %s"
          % (len(results), n_success,
             n_success / len(results) if results else 0.0, args.out),
          file=sys.stderr)
    return 0


def _cmd_evaluate(args):
    file_cfg = _load_config_file(args.config)
    cfg, render, origins = _resolve(args, file_cfg)
    if args.explain_config:
        _explain(cfg, render, origins)
        return 0
    records = read_results_jsonl(args.results)
    report = evaluate(records, render, alpha=cfg.alpha)
    run_id = _manifest("evaluate", cfg.snapshot(render),
                       {"results": {"path": args.results,
                                    "sha256": _file_sha(args.results)}},
                       args.out)
    report.notes.append("manifest:" + run_id)
    report.write_csv(args.out)
    if args.json:
        report.write_json(args.json)
    print("rows=%d ASR=%.3f mean_bleu %.4f -> %.4f mean_ssim=%.4f"
          % (len(report.rows), report.asr, report.mean_bleu_clean,
             report.mean_bleu_adv, report.mean_ssim), file=sys.stderr)
    return 0


def _cmd_audit(args):
    records = read_results_jsonl(args.results)
    clean, findings = verify_records(records)
    print("audited %d records: %d clean, %d findings"
          % (len(records), clean, len(findings)))
    for f in findings[:50]:
        print("  " + str(f))
    return 0 if not findings else RUNTIME_ERROR


def _cmd_selfcheck(args):
    """Mock end-to-end pipeline plus invariant status lines."""
    render = RenderConfig()
    cfg = AttackConfig()
    index = build_pixel_index(bundled.stub_charset(), render)
    ctx = AttackContext(config=cfg, render=render,
                        backends=bundled.mock_backend_suite(), index=index,
                        dictionary=bundled.load_radicals(),
                        segmenter=bundled.attack_segmenter())
    pairs = bundled.load_corpus()[:10]
    results = attack_corpus(pairs, ctx)
    ok = True

    def status(name, passed, detail=""):
        nonlocal ok
        ok = ok and passed
        print("%s %s%s" % ("PASS" if passed else "FAIL", name,
                           " (%s)" % detail if detail else ""))

    status("pipeline-runs", len(results) == len(pairs))
    per_word_ok = True
    rate_ok = True
    gate_ok = True
    for res in results:
        counts = {}
        for rep in res.plan:
            counts[rep.word_index] = counts.get(rep.word_index, 0) + 1
        per_word_ok = per_word_ok and all(v <= 1 for v in counts.values())
        if res.plan:
            rate_ok = rate_ok and (len(res.plan) / res.total_word_chars
                                   < cfg.replacement_rate)
        gate_ok = gate_ok and (not res.plan
                               or res.perceptual.combined > cfg.theta)
    status("per-word-cap", per_word_ok)
    status("rate-strictly-below-r", rate_ok)
    status("perceptual-gate", gate_ok)
    n_success = sum(1 for r in results if r.success)
    status("mock-attack-succeeds", n_success >= 1, "%d/%d" % (n_success, len(results)))
    clean, findings = verify_records([r.to_dict() for r in results])
    status("audit-reverifies", not findings, "%d findings" % len(findings))
    checks = run_conformance(ctx.backends)
    for c in checks:
        status("conformance/" + c.name, c.passed, c.detail if not c.passed else "")
    return 0 if ok else RUNTIME_ERROR


def build_parser():
    p = _Parser(prog="glyphattack",
                description="glyph-substitution adversarial text pipeline")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("render", help="rasterize text to a grayscale PNG")
    sp.add_argument("--text", required=True)
    sp.add_argument("--out", required=True)
    _add_config_flags(sp)
    sp.set_defaults(func=_cmd_render)

    sp = sub.add_parser("build-index", help="build the pixel similarity index")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--repertoire", help="file whose characters form the repertoire")
    g.add_argument("--range", help="hex codepoint range, e.g. 4E00-9FFF")
    sp.add_argument("--out", required=True)
    sp.add_argument("--mode", choices=["exact", "accelerated"], default="exact")
    _add_config_flags(sp)
    sp.set_defaults(func=_cmd_build_index)

    sp = sub.add_parser("query-similar", help="visually similar characters")
    sp.add_argument("--char", required=True)
    sp.add_argument("--index", required=True)
    sp.add_argument("--dict", help="radical decomposition TSV")
    sp.add_argument("--mode", choices=["exact", "accelerated"], default="exact")
    _add_config_flags(sp)
    sp.set_defaults(func=_cmd_query_similar)

    sp = sub.add_parser("attack", help="attack a corpus TSV (<source>\\t<reference>)")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--mock", action="store_true", help="use the bundled mock backends")
    sp.add_argument("--debug-candidates", action="store_true")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--index", help="pixel index file")
    sp.add_argument("--dict", help="radical decomposition TSV")
    _add_config_flags(sp)
    sp.set_defaults(func=_cmd_attack)

    sp = sub.add_parser("evaluate", help="aggregate results into a report")
    sp.add_argument("--results", required=True)
    sp.add_argument("--out", required=True, help="per-sentence CSV")
    sp.add_argument("--json", help="full JSON report")
    _add_config_flags(sp)
    sp.set_defaults(func=_cmd_evaluate)

    sp = sub.add_parser("audit", help="re-verify result constraints offline")
    sp.add_argument("--results", required=True)
    sp.set_defaults(func=_cmd_audit)

    sp = sub.add_parser("selfcheck", help="run the mock pipeline and print invariant status")
    sp.add_argument("--mock", action="store_true", default=True)
    sp.set_defaults(func=_cmd_selfcheck)

    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GlyphAttackError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return RUNTIME_ERROR
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
