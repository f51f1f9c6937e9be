"""Independent re-verification of attack results.

Works from the serialized result records alone: no attack engine, no model
backends.  For every record it re-derives whatever is recomputable offline
and cross-checks it against what the producer recorded:

  * substitution-only discipline: equal lengths, diffs exactly at the plan's
    positions, at most one replacement per word, rate strictly below r;
  * BLEU pair and relative decrease from the stored victim outputs;
  * the three validity clauses: recorded values, thresholds and pass flags
    must be mutually consistent, and the perceptual clause value is
    recomputed from re-rendered sentences when the recorded metric is the
    built-in surrogate (remote metrics cannot be re-queried offline and are
    reported as skipped).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GlyphAttackError
from .evalharness import tokenize_en
from .glyph import RenderConfig
from .metrics import SURROGATE_METRIC_ID, bleu, sentence_perceptual

_REL_TOL = 1e-9


@dataclass
class AuditFinding:
    record_index: int
    check: str
    detail: str

    def __str__(self):
        return "record %d: %s: %s" % (self.record_index, self.check, self.detail)


def _close(a, b, tol=_REL_TOL):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def verify_record(rec, idx=0, render_cache=None):
    """Return a list of AuditFindings for one result record (empty = clean)."""
    problems = []

    def bad(check, detail):
        problems.append(AuditFinding(idx, check, detail))

    base = rec["base"]
    adv = rec["adversarial"]
    plan = rec["plan"]
    cfg = rec["config"]

    # substitution-only discipline
    if len(base) != len(adv):
        bad("substitution-only", "base and adversarial lengths differ")
    else:
        diff = {i for i, (a, b) in enumerate(zip(base, adv)) if a != b}
        planned = {p["position"] for p in plan}
        if diff != planned:
            bad("substitution-only", "diff positions %s != plan positions %s"
                % (sorted(diff), sorted(planned)))
        for p in plan:
            if base[p["position"]] != p["original"] or adv[p["position"]] != p["replacement"]:
                bad("substitution-only", "plan entry at %d does not match texts" % p["position"])

    # per-word cap and strict rate bound
    per_word = {}
    for p in plan:
        per_word[p["word_index"]] = per_word.get(p["word_index"], 0) + 1
    for wi, count in per_word.items():
        if count > 1:
            bad("per-word-cap", "word %d has %d replacements" % (wi, count))
    total = rec.get("total_word_chars", 0)
    if plan:
        if total <= 0:
            bad("rate-bound", "plan non-empty but total_word_chars is %s" % total)
        elif not (len(plan) / total < cfg["replacement_rate"]):
            bad("rate-bound", "rate %d/%d not strictly below r=%g"
                % (len(plan), total, cfg["replacement_rate"]))

    # BLEU pair and quality-drop clause
    ref = tokenize_en(rec["reference"])
    b_clean = bleu(tokenize_en(rec["victim_clean"]), [ref]).value
    b_adv = bleu(tokenize_en(rec["victim_adversarial"]), [ref]).value
    if not _close(b_clean, rec["bleu_clean"]["value"]):
        bad("bleu", "clean BLEU recomputes to %r, recorded %r" % (b_clean, rec["bleu_clean"]["value"]))
    if not _close(b_adv, rec["bleu_adversarial"]["value"]):
        bad("bleu", "adversarial BLEU recomputes to %r, recorded %r" % (b_adv, rec["bleu_adversarial"]["value"]))
    baseline_zero = b_clean == 0.0
    rel = 0.0 if baseline_zero else (b_clean - b_adv) / b_clean
    if baseline_zero != rec["baseline_zero"]:
        bad("baseline-zero", "recomputed %s, recorded %s" % (baseline_zero, rec["baseline_zero"]))
    if not _close(rel, rec["relative_decrease"]):
        bad("quality-drop", "relative decrease recomputes to %r, recorded %r"
            % (rel, rec["relative_decrease"]))

    cons = rec["constraints"]
    qd = cons["quality_drop"]
    if not _close(qd["value"], rec["relative_decrease"]):
        bad("quality-drop", "clause value differs from relative_decrease field")
    if qd["passed"] != (qd["value"] > qd["threshold"]):
        bad("quality-drop", "pass flag inconsistent with value/threshold")
    expected_success = bool(rel > cfg["alpha"]) and not baseline_zero
    if rec["success"] != expected_success:
        bad("success-flag", "recorded %s, recomputed %s" % (rec["success"], expected_success))

    # semantic clause: value itself needs the similarity backend, so check
    # the recorded triple for internal consistency only
    sem = cons["semantic"]
    if not _close(sem["value"], rec["sim_source_base"]):
        bad("semantic", "clause value differs from sim_source_base")
    expected_sem = (base == rec["source"]) or (sem["value"] > sem["threshold"])
    if sem["passed"] != expected_sem:
        bad("semantic", "pass flag inconsistent with value/threshold")

    # perceptual clause: recompute the combined score when the metric is the
    # built-in surrogate
    per = cons["perceptual"]
    if not _close(per["value"], rec["perceptual"]["combined"]):
        bad("perceptual", "clause value differs from perceptual.combined")
    if per["passed"] != (per["value"] > per["threshold"]):
        bad("perceptual", "pass flag inconsistent with value/threshold")
    stored = rec["perceptual"]
    if not _close(stored["combined"], stored["global_term"] + stored["epsilon"] * stored["local_sum"]):
        bad("perceptual", "combined != global + epsilon * local in the record")
    if stored["metric"] == SURROGATE_METRIC_ID and len(base) == len(adv):
        render_snap = cfg["render"]
        key = render_snap.get("geometry_digest")
        render_cfg = None
        if render_cache is not None and key in render_cache:
            render_cfg = render_cache[key]
        try:
            if render_cfg is None:
                render_cfg = RenderConfig.from_snapshot(render_snap)
                if render_cache is not None:
                    render_cache[key] = render_cfg
            triples = [(p["position"], p["original"], p["replacement"]) for p in plan]
            score = sentence_perceptual(base, adv, triples, stored["epsilon"], render_cfg)
        except GlyphAttackError as exc:
            # fonts are external to the record; without them the clause
            # cannot be attested, which is itself a reportable finding
            bad("perceptual", "cannot re-render for verification: %s" % exc)
        else:
            if not _close(score.combined, stored["combined"]):
                bad("perceptual", "combined recomputes to %r, recorded %r"
                    % (score.combined, stored["combined"]))

    return problems


def verify_records(records):
    """Audit a result stream; returns (n_clean, findings)."""
    findings = []
    clean = 0
    cache = {}
    for idx, rec in enumerate(records):
        try:
            probs = verify_record(rec, idx, render_cache=cache)
        except (KeyError, TypeError, AttributeError) as exc:
            probs = [AuditFinding(idx, "malformed-record",
                                  "%s: %s" % (type(exc).__name__, exc))]
        if probs:
            findings.extend(probs)
        else:
            clean += 1
    return clean, findings
