"""The adversarial-substitution engine.

End-to-end flow for one (source, reference) pair:

  1. expand the solution space: the source itself plus back-translations of
     the reference that clear the sentence-similarity floor beta;
  2. per expansion, rank words by masked-LM importance and walk them,
     substituting at most one character per word from its visual candidate
     set, keeping the overall replacement rate strictly below r;
  3. gate each substitution on the combined perceptual score (> theta),
     reverting offenders in application order;
  4. among the surviving perturbed expansions, pick the one with minimal
     sentence similarity to the source.

Success is judged separately: relative BLEU decrease of the victim output
against the reference, compared to alpha.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import (BackendError, GlyphAttackError, NoGlyphError,
                     ZeroVectorError)
from .evalharness import tokenize_en
from .glyph import RenderConfig, render_char
from .metrics import PerceptualScore, bleu, perceptual_similarity, sentence_perceptual
from .models import BackendSuite, reverse_translations
from .simindex import (CandidateSet, GlyphDictionary, PixelIndex,
                       merge_candidates, pixel_candidates, radical_candidates)

RESULT_SCHEMA = "glyphattack-result/v1"


@dataclass(frozen=True)
class AttackConfig:
    """All attack knobs; defaults follow the evaluated setup where stated."""

    alpha: float = 0.5            # success floor on relative quality drop
    beta: float = 0.5             # sentence-similarity floor for expansions
    theta: float = 0.95           # perceptual floor (gate)
    epsilon: float = 0.01         # local-perception weight
    replacement_rate: float = 0.2  # strict upper bound r
    top_m: int = 50               # cosine retrieval breadth
    top_k: int = 10               # MSE re-rank depth
    importance_order: str = "asc"  # attack hardest-to-predict words first
    fanout: int = 4               # reverse-translation candidates
    src_lang: str = "zh"
    tgt_lang: str = "en"

    def __post_init__(self):
        if not (0.0 <= self.replacement_rate <= 1.0):
            raise ValueError("replacement rate must lie in [0, 1]")
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValueError("epsilon must lie in [0, 1]")
        if self.top_k > self.top_m:
            raise ValueError("need k <= m")
        if self.top_k < 1 or self.top_m < 1:
            raise ValueError("m and k must be positive")
        for name in ("alpha", "beta", "theta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError("%s must be finite" % name)
        if self.importance_order not in ("asc", "desc"):
            raise ValueError("importance_order must be 'asc' or 'desc'")
        if self.fanout < 0:
            raise ValueError("fanout must be >= 0")

    def snapshot(self, render: RenderConfig, backend_desc="mock"):
        return {
            "alpha": self.alpha, "beta": self.beta, "theta": self.theta,
            "epsilon": self.epsilon, "replacement_rate": self.replacement_rate,
            "top_m": self.top_m, "top_k": self.top_k,
            "importance_order": self.importance_order, "fanout": self.fanout,
            "src_lang": self.src_lang, "tgt_lang": self.tgt_lang,
            "backends": backend_desc, "render": render.snapshot(),
        }


@dataclass(frozen=True)
class Replacement:
    word_index: int
    char_index: int
    position: int      # absolute offset in the base sentence
    original: str
    replacement: str
    source: str        # candidate provenance: rad / pix / both
    local_score: float

    def to_dict(self):
        return {"word_index": self.word_index, "char_index": self.char_index,
                "position": self.position, "original": self.original,
                "replacement": self.replacement, "source": self.source,
                "local_score": self.local_score}

    @classmethod
    def from_dict(cls, d):
        return cls(word_index=d["word_index"], char_index=d["char_index"],
                   position=d["position"], original=d["original"],
                   replacement=d["replacement"], source=d["source"],
                   local_score=d["local_score"])


@dataclass(frozen=True)
class ReplacementPlan:
    base: str
    replacements: tuple
    total_word_chars: int
    audit: tuple = ()  # (position, candidate, reason) notes for tried-and-rejected

    def rate(self):
        if self.total_word_chars == 0:
            return 0.0
        return len(self.replacements) / self.total_word_chars

    def per_word_counts(self):
        counts = {}
        for r in self.replacements:
            counts[r.word_index] = counts.get(r.word_index, 0) + 1
        return counts

    def apply(self):
        return apply_replacements(self.base, self.replacements)


def apply_replacements(base, replacements):
    chars = list(base)
    for r in replacements:
        if chars[r.position] != r.original:
            raise ValueError("plan does not match base text at position %d" % r.position)
        chars[r.position] = r.replacement
    return "".join(chars)


def _as_triples(replacements):
    return [(r.position, r.original, r.replacement) for r in replacements]


class AttackContext:
    """Immutable run state shared across sentences: config, models, caches."""

    def __init__(self, config: AttackConfig, render: RenderConfig,
                 backends: BackendSuite, index: PixelIndex,
                 dictionary: GlyphDictionary, segmenter,
                 debug_candidates=False, backend_desc="mock"):
        self.config = config
        self.render = render
        self.backends = backends
        self.index = index
        self.dictionary = dictionary
        self.segmenter = segmenter
        self.debug_candidates = debug_candidates
        self.backend_desc = backend_desc
        self._cand_cache = {}
        self._local_cache = {}

    # -- candidate machinery -------------------------------------------------

    def candidates_for(self, char) -> CandidateSet:
        cached = self._cand_cache.get(char)
        if cached is not None:
            return cached
        rad = radical_candidates(char, self.dictionary)
        n = len(self.index)
        m_eff = min(self.config.top_m, n - 1)
        k_eff = min(self.config.top_k, m_eff)
        pix = CandidateSet.empty(char)
        if m_eff >= 1:
            try:
                pix = pixel_candidates(char, self.index, self.render, m_eff, k_eff)
            except (NoGlyphError, ZeroVectorError):
                pix = CandidateSet.empty(char)
        merged = merge_candidates(char, rad, pix)
        self._cand_cache[char] = merged
        return merged

    def local_similarity(self, orig, repl):
        """Per-character perceptual similarity; None if either cell is missing."""
        key = (orig, repl)
        if key in self._local_cache:
            return self._local_cache[key]
        if not (self.render.can_render(orig) and self.render.can_render(repl)):
            score = None
        else:
            score, _ = perceptual_similarity(render_char(orig, self.render),
                                             render_char(repl, self.render),
                                             self.backends.perceptual)
        self._local_cache[key] = score
        return score

    def combined_score(self, base, replacements) -> PerceptualScore:
        text = apply_replacements(base, replacements)
        return sentence_perceptual(base, text, _as_triples(replacements),
                                   self.config.epsilon, self.render,
                                   self.backends.perceptual)


@dataclass(frozen=True)
class Expansion:
    text: str
    similarity: float  # sentence similarity to the source


def expand_solution_space(x, y, ctx: AttackContext):
    """Source sentence plus beta-cleared back-translations of the reference.

    The source itself always participates, listed first; the rest follow in
    descending similarity.  Returns (expansions, incomplete_flag); backend
    failures surface as a partial result, never an exception.
    """
    cfg = ctx.config
    incomplete = False
    expansions = [Expansion(text=x, similarity=ctx.backends.sim.sent_sim(x, x))]
    try:
        variants = reverse_translations(x, y, cfg.fanout, ctx.backends.aux,
                                        cfg.src_lang, cfg.tgt_lang)
    except BackendError:
        return expansions, True
    scored = []
    for cand in variants:
        if cand == x:
            continue
        try:
            sim = ctx.backends.sim.sent_sim(cand, x)
        except BackendError:
            incomplete = True
            continue
        if sim > cfg.beta:
            scored.append(Expansion(text=cand, similarity=sim))
    scored.sort(key=lambda e: (-e.similarity, e.text))
    return expansions + scored, incomplete


def plan_replacements(x_hat, ctx: AttackContext) -> ReplacementPlan:
    """Walk words in importance order, substituting at most one char each.

    At each word the (position, candidate) pair with the highest local
    perceptual similarity that keeps the running combined score above theta
    wins; when a word's best pair fails the gate the next candidate is tried
    before the word is skipped (skips are recorded in the audit trail).
    Stops before the replacement-count bound count/total < r would break.
    """
    cfg = ctx.config
    words = [t for t in ctx.segmenter.segment(x_hat) if t.is_word]
    denom = sum(len(w.text) for w in words)
    if not words or denom == 0:
        return ReplacementPlan(base=x_hat, replacements=(), total_word_chars=0)

    scores = ctx.backends.mlm.mlm_scores([w.text for w in words])
    sign = 1.0 if cfg.importance_order == "asc" else -1.0
    order = sorted(range(len(words)), key=lambda i: (sign * scores[i], i))

    accepted = []
    audit = []
    for wi in order:
        if (len(accepted) + 1) / denom >= cfg.replacement_rate:
            break
        word = words[wi]
        pairs = []
        for j, c in enumerate(word.text):
            for cand in ctx.candidates_for(c).candidates:
                local = ctx.local_similarity(c, cand.char)
                if local is None:
                    audit.append((word.start + j, cand.char, "unrenderable"))
                    continue
                pairs.append((local, j, cand))
        pairs.sort(key=lambda p: (-p[0], p[1], p[2].char))
        for local, j, cand in pairs:
            entry = Replacement(word_index=wi, char_index=j,
                                position=word.start + j,
                                original=word.text[j], replacement=cand.char,
                                source=cand.source, local_score=local)
            score = ctx.combined_score(x_hat, accepted + [entry])
            if score.combined > cfg.theta:
                accepted.append(entry)
                break
            audit.append((entry.position, cand.char, "gate"))
    accepted.sort(key=lambda r: r.position)
    return ReplacementPlan(base=x_hat, replacements=tuple(accepted),
                           total_word_chars=denom, audit=tuple(audit))


@dataclass(frozen=True)
class GateResult:
    plan: ReplacementPlan        # surviving replacements only
    final_text: str
    score: PerceptualScore
    reverted: tuple


def apply_perceptual_gate(plan: ReplacementPlan, ctx: AttackContext) -> GateResult:
    """Re-check each replacement in application order, reverting offenders.

    A replacement whose inclusion drops the combined score to <= theta is
    rolled back; the final text always satisfies combined > theta relative
    to the plan's base (or is the base itself).
    """
    accepted = []
    reverted = []
    for entry in plan.replacements:
        score = ctx.combined_score(plan.base, accepted + [entry])
        if score.combined > ctx.config.theta:
            accepted.append(entry)
        else:
            reverted.append(entry)
    final_score = ctx.combined_score(plan.base, accepted)
    surviving = ReplacementPlan(base=plan.base, replacements=tuple(accepted),
                                total_word_chars=plan.total_word_chars,
                                audit=plan.audit)
    return GateResult(plan=surviving, final_text=surviving.apply(),
                      score=final_score, reverted=tuple(reverted))


@dataclass
class AttackResult:
    """Full audit record for one attacked sentence."""

    source: str
    reference: str
    base: str
    adversarial: str
    plan: tuple
    reverted: tuple
    perceptual: PerceptualScore
    sim_source_base: float
    sim_source_adversarial: float
    victim_clean: str
    victim_adversarial: str
    bleu_clean: object
    bleu_adversarial: object
    relative_decrease: float
    success: bool
    baseline_zero: bool
    incomplete: bool
    config: dict
    total_word_chars: int
    candidates_log: list = field(default_factory=list)

    def constraints(self):
        """The three recorded adversarial-validity clauses."""
        cfg = self.config
        return {
            "quality_drop": {"value": self.relative_decrease,
                             "threshold": cfg["alpha"],
                             "passed": bool(self.relative_decrease > cfg["alpha"])},
            "semantic": {"value": self.sim_source_base,
                         "threshold": cfg["beta"],
                         "passed": bool(self.base == self.source
                                        or self.sim_source_base > cfg["beta"])},
            "perceptual": {"value": self.perceptual.combined,
                           "threshold": cfg["theta"],
                           "passed": bool(self.perceptual.combined > cfg["theta"])},
        }

    def to_dict(self):
        d = {
            "schema": RESULT_SCHEMA,
            "source": self.source,
            "reference": self.reference,
            "base": self.base,
            "adversarial": self.adversarial,
            "plan": [r.to_dict() for r in self.plan],
            "reverted": [r.to_dict() for r in self.reverted],
            "total_word_chars": self.total_word_chars,
            "perceptual": self.perceptual.to_dict(),
            "sim_source_base": self.sim_source_base,
            "sim_source_adversarial": self.sim_source_adversarial,
            "constraints": self.constraints(),
            "victim_clean": self.victim_clean,
            "victim_adversarial": self.victim_adversarial,
            "bleu_clean": self.bleu_clean.to_dict(),
            "bleu_adversarial": self.bleu_adversarial.to_dict(),
            "relative_decrease": self.relative_decrease,
            "success": self.success,
            "baseline_zero": self.baseline_zero,
            "incomplete": self.incomplete,
            "config": self.config,
        }
        if self.candidates_log:
            d["candidates"] = self.candidates_log
        return d


def run_attack(x, y, ctx: AttackContext) -> AttackResult:
    """Attack one sentence end to end; backend failures mark the result
    incomplete instead of raising."""
    cfg = ctx.config
    incomplete = False
    try:
        expansions, incomplete = expand_solution_space(x, y, ctx)
    except GlyphAttackError:
        expansions, incomplete = [Expansion(x, 1.0)], True

    best_text = x
    best_sim = expansions[0].similarity  # sim(x, x) under the live backend
    best_base = x
    best_plan = ReplacementPlan(base=x, replacements=(), total_word_chars=0)
    best_score = None
    best_reverted = ()
    log = []
    for exp in expansions:
        try:
            plan = plan_replacements(exp.text, ctx)
            gate = apply_perceptual_gate(plan, ctx)
            sim_final = ctx.backends.sim.sent_sim(gate.final_text, x)
        except BackendError:
            incomplete = True
            continue
        if ctx.debug_candidates:
            log.append({"base": exp.text, "base_sim": exp.similarity,
                        "candidate": gate.final_text, "candidate_sim": sim_final,
                        "combined": gate.score.combined,
                        "n_replacements": len(gate.plan.replacements)})
        if sim_final < best_sim:
            best_text = gate.final_text
            best_sim = sim_final
            best_base = exp.text
            best_plan = gate.plan
            best_score = gate.score
            best_reverted = gate.reverted

    if best_score is None:
        # nothing beat the untouched source: x_delta == x, empty plan
        words = [t for t in ctx.segmenter.segment(x) if t.is_word]
        best_plan = ReplacementPlan(base=x, replacements=(),
                                    total_word_chars=sum(len(w.text) for w in words))
        best_score = ctx.combined_score(x, [])
        best_base = x
        best_text = x
        best_sim = expansions[0].similarity

    sim_source_base = next(e.similarity for e in expansions if e.text == best_base)

    try:
        victim_clean = ctx.backends.victim.translate(x, cfg.src_lang, cfg.tgt_lang)
        victim_adv = ctx.backends.victim.translate(best_text, cfg.src_lang, cfg.tgt_lang)
    except BackendError:
        victim_clean = victim_adv = ""
        incomplete = True

    ref_tokens = tokenize_en(y)
    bleu_clean = bleu(tokenize_en(victim_clean), [ref_tokens])
    bleu_adv = bleu(tokenize_en(victim_adv), [ref_tokens])
    baseline_zero = bleu_clean.value == 0.0
    rel = 0.0 if baseline_zero else (bleu_clean.value - bleu_adv.value) / bleu_clean.value
    success = bool(rel > cfg.alpha) and not baseline_zero

    return AttackResult(
        source=x, reference=y, base=best_base, adversarial=best_text,
        plan=best_plan.replacements, reverted=best_reverted,
        perceptual=best_score,
        sim_source_base=sim_source_base,
        sim_source_adversarial=best_sim,
        victim_clean=victim_clean, victim_adversarial=victim_adv,
        bleu_clean=bleu_clean, bleu_adversarial=bleu_adv,
        relative_decrease=rel, success=success, baseline_zero=baseline_zero,
        incomplete=incomplete,
        config=cfg.snapshot(ctx.render, ctx.backend_desc),
        total_word_chars=best_plan.total_word_chars,
        candidates_log=log)


def attack_corpus(pairs, ctx: AttackContext, workers=1):
    """Attack (source, reference) pairs, optionally in parallel.

    Shared state (index, dictionary, config) is immutable during the run;
    results come back in input order regardless of worker count.
    """
    if workers <= 1:
        return [run_attack(x, y, ctx) for x, y in pairs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: run_attack(p[0], p[1], ctx), pairs))
