"""Corpus-level evaluation: BLEU deltas, attack success rate, render SSIM.

The harness consumes attack-result records (dicts, one per sentence) and is
a pure function of that stream plus its configuration: it re-derives BLEU
from the recorded victim outputs rather than trusting any score a producer
may have stored, recomputes success at its own alpha, and renders both
sentences to score imperceptibility with SSIM.

Rows whose clean BLEU is zero cannot express a relative decrease; they are
excluded from the ASR denominator and surfaced in a dedicated counter.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field

from .errors import EmptyTextError, TooLongError
from .glyph import render_sentence
from .metrics import bleu, corpus_bleu, pad_to_width, ssim

# ---------------------------------------------------------------------------
# English tokenization (Treebank-style rules)
# ---------------------------------------------------------------------------
# Rule tables follow the classic Penn Treebank tokenizer: punctuation split
# into separate tokens, quote normalization to ``/'', clitics (n't 'll 're
# 've 's 'd 'm) split off, a fixed list of fused forms (cannot, gonna, ...)
# broken apart.  The exact behavior is frozen by the golden test file.

_STARTING_QUOTES = [
    (re.compile(r"^\""), r"``"),
    (re.compile(r"(``)"), r" \1 "),
    (re.compile(r"([ \(\[{<])(\"|\'{2})"), r"\1 `` "),
]

_PUNCTUATION = [
    (re.compile(r"([:,])([^\d])"), r" \1 \2"),
    (re.compile(r"([:,])$"), r" \1 "),
    (re.compile(r"\.\.\."), r" ... "),
    (re.compile(r"[;@#$%&]"), r" \g<0> "),
    (re.compile(r"([^\.])(\.)([\]\)}>\"']*)\s*$"), r"\1 \2\3 "),
    (re.compile(r"[?!]"), r" \g<0> "),
    (re.compile(r"([^'])' "), r"\1 ' "),
]

_PARENS_BRACKETS = [(re.compile(r"[\]\[\(\)\{\}\<\>]"), r" \g<0> ")]

_DOUBLE_DASHES = [(re.compile(r"--"), r" -- ")]

_ENDING_QUOTES = [
    (re.compile(r'"'), " '' "),
    (re.compile(r"(\S)(\'\')"), r"\1 \2 "),
    (re.compile(r"([^' ])('[sS]|'[mM]|'[dD]|') "), r"\1 \2 "),
    (re.compile(r"([^' ])('ll|'LL|'re|'RE|'ve|'VE|n't|N'T) "), r"\1 \2 "),
]

_CONTRACTIONS2 = [re.compile(p, re.IGNORECASE) for p in (
    r"\b(can)(not)\b",
    r"\b(d)('ye)\b",
    r"\b(gim)(me)\b",
    r"\b(gon)(na)\b",
    r"\b(got)(ta)\b",
    r"\b(lem)(me)\b",
    r"\b(more)('n)\b",
    r"\b(wan)(na)(?=\s)",
)]

_CONTRACTIONS3 = [re.compile(p, re.IGNORECASE) for p in (
    r" ('t)(is)\b", r" ('t)(was)\b",
)]


def tokenize_en(text):
    """Tokenize English text: punctuation off, contractions at the clitic."""
    for regexp, sub in _STARTING_QUOTES:
        text = regexp.sub(sub, text)
    for regexp, sub in _PUNCTUATION:
        text = regexp.sub(sub, text)
    for regexp, sub in _PARENS_BRACKETS:
        text = regexp.sub(sub, text)
    for regexp, sub in _DOUBLE_DASHES:
        text = regexp.sub(sub, text)
    text = " " + text + " "
    for regexp, sub in _ENDING_QUOTES:
        text = regexp.sub(sub, text)
    for regexp in _CONTRACTIONS2:
        text = regexp.sub(r" \1 \2 ", text)
    for regexp in _CONTRACTIONS3:
        text = regexp.sub(r" \1 \2 ", text)
    return text.split()


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

_CSV_COLUMNS = ["idx", "source", "adversarial", "bleu_clean", "bleu_adv",
                "relative_decrease", "success", "ssim", "baseline_zero"]


@dataclass(frozen=True)
class EvalRow:
    idx: int
    source: str
    adversarial: str
    bleu_clean: float
    bleu_adv: float
    relative_decrease: float
    success: bool
    ssim: float
    baseline_zero: bool

    def to_dict(self):
        return {k: getattr(self, k) for k in _CSV_COLUMNS}

    @classmethod
    def from_dict(cls, d):
        return cls(idx=int(d["idx"]), source=d["source"], adversarial=d["adversarial"],
                   bleu_clean=float(d["bleu_clean"]), bleu_adv=float(d["bleu_adv"]),
                   relative_decrease=float(d["relative_decrease"]),
                   success=_parse_bool(d["success"]), ssim=float(d["ssim"]),
                   baseline_zero=_parse_bool(d["baseline_zero"]))


def _parse_bool(v):
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() == "true"


@dataclass
class EvalReport:
    rows: list
    alpha: float
    mean_bleu_clean: float
    mean_bleu_adv: float
    corpus_bleu_clean: float
    corpus_bleu_adv: float
    asr: float
    mean_ssim: float
    zero_baseline_count: int
    render_settings: dict
    metric_ids: dict
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "schema": "glyphattack-report/v1",
            "alpha": self.alpha,
            "aggregates": {
                "rows": len(self.rows),
                "mean_bleu_clean": self.mean_bleu_clean,
                "mean_bleu_adv": self.mean_bleu_adv,
                "corpus_bleu_clean": self.corpus_bleu_clean,
                "corpus_bleu_adv": self.corpus_bleu_adv,
                "asr": self.asr,
                "mean_ssim": self.mean_ssim,
                "zero_baseline_count": self.zero_baseline_count,
            },
            "render_settings": self.render_settings,
            "metric_ids": self.metric_ids,
            "notes": self.notes,
            "per_sentence": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, d):
        agg = d["aggregates"]
        return cls(rows=[EvalRow.from_dict(r) for r in d["per_sentence"]],
                   alpha=d["alpha"],
                   mean_bleu_clean=agg["mean_bleu_clean"],
                   mean_bleu_adv=agg["mean_bleu_adv"],
                   corpus_bleu_clean=agg["corpus_bleu_clean"],
                   corpus_bleu_adv=agg["corpus_bleu_adv"],
                   asr=agg["asr"], mean_ssim=agg["mean_ssim"],
                   zero_baseline_count=agg["zero_baseline_count"],
                   render_settings=d["render_settings"],
                   metric_ids=d["metric_ids"], notes=list(d.get("notes", [])))

    # -- emission ------------------------------------------------------------

    def write_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, indent=1)
            fh.write("\n")

    @classmethod
    def read_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(_CSV_COLUMNS)
            for r in self.rows:
                d = r.to_dict()
                w.writerow([_csv_cell(d[c]) for c in _CSV_COLUMNS])

    @staticmethod
    def read_csv_rows(path):
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            return [EvalRow.from_dict(row) for row in reader]


def _csv_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def _render_ssim(a_text, b_text, render_cfg):
    """SSIM between padded sentence renders; degenerate inputs score 0."""
    try:
        a = render_sentence(a_text, render_cfg)
        b = render_sentence(b_text, render_cfg)
    except (EmptyTextError, TooLongError):
        return 0.0
    width = max(a.width, b.width)
    return ssim(pad_to_width(a, width, render_cfg.background),
                pad_to_width(b, width, render_cfg.background))


def evaluate(results, render_cfg, alpha=0.5) -> EvalReport:
    """Aggregate an attack-result stream into an EvalReport.

    `results` yields dicts with at least source, adversarial, reference,
    victim_clean and victim_adversarial fields (AttackResult dict form).
    BLEU is recomputed here; success means relative BLEU decrease > alpha.
    """
    rows = []
    pairs_clean = []
    pairs_adv = []
    zero_baseline = 0
    successes = 0
    metric_note = set()
    for idx, rec in enumerate(results):
        if hasattr(rec, "to_dict"):
            rec = rec.to_dict()
        ref_tokens = tokenize_en(rec["reference"])
        clean_tokens = tokenize_en(rec["victim_clean"])
        adv_tokens = tokenize_en(rec["victim_adversarial"])
        b_clean = bleu(clean_tokens, [ref_tokens]).value
        b_adv = bleu(adv_tokens, [ref_tokens]).value
        pairs_clean.append((clean_tokens, [ref_tokens]))
        pairs_adv.append((adv_tokens, [ref_tokens]))
        baseline_zero = b_clean == 0.0
        rel = 0.0 if baseline_zero else (b_clean - b_adv) / b_clean
        success = bool(rel > alpha) and not baseline_zero
        if baseline_zero:
            zero_baseline += 1
        elif success:
            successes += 1
        row_ssim = _render_ssim(rec["source"], rec["adversarial"], render_cfg)
        metric_note.add(rec.get("perceptual", {}).get("metric", "unknown"))
        rows.append(EvalRow(idx=idx, source=rec["source"],
                            adversarial=rec["adversarial"],
                            bleu_clean=b_clean, bleu_adv=b_adv,
                            relative_decrease=rel, success=success,
                            ssim=row_ssim, baseline_zero=baseline_zero))
    n = len(rows)
    denom = n - zero_baseline
    report = EvalReport(
        rows=rows, alpha=alpha,
        mean_bleu_clean=sum(r.bleu_clean for r in rows) / n if n else 0.0,
        mean_bleu_adv=sum(r.bleu_adv for r in rows) / n if n else 0.0,
        corpus_bleu_clean=corpus_bleu(pairs_clean) if pairs_clean else 0.0,
        corpus_bleu_adv=corpus_bleu(pairs_adv) if pairs_adv else 0.0,
        asr=successes / denom if denom else 0.0,
        mean_ssim=sum(r.ssim for r in rows) / n if n else 0.0,
        zero_baseline_count=zero_baseline,
        render_settings=render_cfg.snapshot(),
        metric_ids={"bleu": "sentence-bleu4/add-eps-0.1-on-zero",
                    "ssim": "uniform7-ssim/v1",
                    "perceptual": sorted(metric_note)},
        notes=(["%d rows had zero clean BLEU and were excluded from ASR"
                % zero_baseline] if zero_baseline else []))
    return report


def read_results_jsonl(path):
    """Load an attack results file (one JSON object per line)."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out
