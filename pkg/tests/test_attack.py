import json

import numpy as np
import pytest

from glyphattack import (AttackConfig, AttackContext, Replacement,
                         ReplacementPlan, apply_perceptual_gate, attack_corpus,
                         expand_solution_space, plan_replacements, run_attack,
                         sentence_perceptual)
from glyphattack.attack import apply_replacements
from glyphattack.bundled import load_mock_model
from glyphattack.simindex import CandidateSet

from conftest import make_ctx, needs_dejavu


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

def test_config_invariants_enforced():
    with pytest.raises(ValueError):
        AttackConfig(replacement_rate=1.5)
    with pytest.raises(ValueError):
        AttackConfig(epsilon=-0.1)
    with pytest.raises(ValueError):
        AttackConfig(top_m=5, top_k=6)
    with pytest.raises(ValueError):
        AttackConfig(theta=float("inf"))
    with pytest.raises(ValueError):
        AttackConfig(importance_order="sideways")


# ---------------------------------------------------------------------------
# solution space expansion
# ---------------------------------------------------------------------------

def test_beta_one_leaves_only_source(render_cfg, stub_index, radicals, corpus):
    ctx = make_ctx(render_cfg, stub_index, radicals, beta=1.0)
    src, ref = corpus[0]
    exps, incomplete = expand_solution_space(src, ref, ctx)
    assert [e.text for e in exps] == [src]
    assert not incomplete


def test_beta_minus_one_keeps_all_candidates(render_cfg, stub_index, radicals, corpus):
    ctx = make_ctx(render_cfg, stub_index, radicals, beta=-1.0)
    src, ref = corpus[0]
    exps, _ = expand_solution_space(src, ref, ctx)
    # mock aux reconstructs x exactly, so the only candidate equals x and
    # is deduplicated away: x itself still always participates
    assert exps[0].text == src
    assert exps[0].similarity == 1.0


def test_mock_roundtrip_expansion_is_exact(render_cfg, stub_index, radicals, corpus):
    ctx = make_ctx(render_cfg, stub_index, radicals)
    src, ref = corpus[0]
    exps, _ = expand_solution_space(src, ref, ctx)
    assert exps[0].text == src and exps[0].similarity == 1.0


class _DownSim:
    def sent_sim(self, a, b):
        from glyphattack.errors import BackendUnavailableError
        raise BackendUnavailableError("down")


def test_backend_failure_yields_incomplete_result(mock_ctx, corpus):
    mock_ctx.backends.aux = _DownAux()
    src, ref = corpus[0]
    res = run_attack(src, ref, mock_ctx)
    assert res.incomplete
    assert res.adversarial  # still produced something


class _DownAux:
    def translate(self, *args, **kwargs):
        from glyphattack.errors import BackendUnavailableError
        raise BackendUnavailableError("down")


# ---------------------------------------------------------------------------
# replacement planning
# ---------------------------------------------------------------------------

def test_rate_zero_means_empty_plan(render_cfg, stub_index, radicals):
    ctx = make_ctx(render_cfg, stub_index, radicals, replacement_rate=0.0)
    plan = plan_replacements("木林未日上下", ctx)
    assert plan.replacements == ()


def test_single_word_sentence_at_most_one(render_cfg, stub_index, radicals):
    # theta lowered: on a two-char sentence one swap moves half the image,
    # so the default gate would veto everything
    ctx = make_ctx(render_cfg, stub_index, radicals, replacement_rate=1.0,
                   theta=0.5)
    plan = plan_replacements("未日", ctx)
    assert len(plan.replacements) <= 1


def test_ten_char_sentence_rate_point_two_allows_one(render_cfg, stub_index, radicals):
    # oracle: direct evaluation of the strict inequality count/total < r
    ctx = make_ctx(render_cfg, stub_index, radicals, replacement_rate=0.2)
    text = "未日海口王田水山大人"  # 5 words, 10 word-chars
    plan = plan_replacements(text, ctx)
    assert plan.total_word_chars == 10
    assert len(plan.replacements) == 1
    assert 1 / 10 < 0.2
    assert not (2 / 10 < 0.2)  # a second one would tie the bound, not beat it


def test_plan_respects_per_word_cap(render_cfg, stub_index, radicals):
    ctx = make_ctx(render_cfg, stub_index, radicals, replacement_rate=0.99)
    plan = plan_replacements("未日海口王田水山", ctx)
    counts = plan.per_word_counts()
    assert counts and all(v == 1 for v in counts.values())


def test_plan_prefers_high_local_similarity(render_cfg, stub_index, radicals):
    ctx = make_ctx(render_cfg, stub_index, radicals, replacement_rate=0.9,
                   theta=0.5)
    plan = plan_replacements("未日", ctx)
    assert len(plan.replacements) == 1
    chosen = plan.replacements[0]
    # the best stub-font neighbour of either char of the word
    best = max(
        (ctx.local_similarity(c, cand.char), j, cand.char)
        for j, c in enumerate("未日")
        for cand in ctx.candidates_for(c).candidates
        if ctx.local_similarity(c, cand.char) is not None)
    assert (chosen.local_score, chosen.char_index, chosen.replacement) == best


def test_importance_order_attacks_rare_words_first(render_cfg, stub_index, radicals):
    ctx = make_ctx(render_cfg, stub_index, radicals, replacement_rate=0.1)
    # budget of exactly one replacement over 16 word-chars (1/16 < 0.1 < 2/16)
    text = "一二的是未日上下木林三千好女子马"
    plan = plan_replacements(text, ctx)
    assert len(plan.replacements) == 1
    rep = plan.replacements[0]
    assert text[rep.position] in "未日"  # the rare word got hit first


def test_importance_order_desc_flips_target(render_cfg, stub_index, radicals):
    ctx = make_ctx(render_cfg, stub_index, radicals, replacement_rate=0.1,
                   importance_order="desc")
    text = "一二的是未日上下木林三千好女子马"
    plan = plan_replacements(text, ctx)
    assert len(plan.replacements) == 1
    assert text[plan.replacements[0].position] in "一二"  # most frequent word


def test_empty_candidates_mean_empty_plan(render_cfg, stub_index, radicals):
    ctx = make_ctx(render_cfg, stub_index, radicals)
    ctx.candidates_for = lambda ch: CandidateSet.empty(ch)
    plan = plan_replacements("木林未日", ctx)
    assert plan.replacements == ()


# ---------------------------------------------------------------------------
# perceptual gate
# ---------------------------------------------------------------------------

def _manual_plan(ctx, base, triples):
    entries = []
    for wi, (pos, orig, repl) in enumerate(triples):
        local = ctx.local_similarity(orig, repl)
        entries.append(Replacement(word_index=wi, char_index=0, position=pos,
                                   original=orig, replacement=repl,
                                   source="pix", local_score=local or 0.0))
    return ReplacementPlan(base=base, replacements=tuple(entries),
                           total_word_chars=len(base))


def test_gate_theta_zero_reverts_nothing(render_cfg, stub_index, radicals):
    ctx = make_ctx(render_cfg, stub_index, radicals, theta=0.0)
    plan = _manual_plan(ctx, "木林未日", [(2, "未", "末")])
    gate = apply_perceptual_gate(plan, ctx)
    assert gate.reverted == ()
    assert gate.final_text == "木林末日"


def test_gate_theta_at_identity_reverts_everything(render_cfg, stub_index, radicals):
    base = "木林未日"
    probe = make_ctx(render_cfg, stub_index, radicals)
    identity = sentence_perceptual(base, base, [], probe.config.epsilon, render_cfg)
    ctx = make_ctx(render_cfg, stub_index, radicals, theta=identity.combined)
    plan = _manual_plan(ctx, base, [(2, "未", "末"), (0, "木", "林")])
    gate = apply_perceptual_gate(plan, ctx)
    assert gate.final_text == base
    assert len(gate.reverted) == 2


@needs_dejavu
def test_gate_reverts_exactly_the_gross_replacement(render_cfg, stub_index, radicals):
    # oracle: direct evaluation of the combined score for both prefixes;
    # the blank space glyph is a maximally dissimilar replacement
    base = "木林未日"
    probe = make_ctx(render_cfg, stub_index, radicals)
    eps = probe.config.epsilon
    benign = sentence_perceptual(base, "木林末日", [(2, "未", "末")], eps, render_cfg)
    both = sentence_perceptual(base, "木林末 ", [(2, "未", "末"), (3, "日", " ")],
                               eps, render_cfg)
    theta = (both.combined + benign.combined) / 2.0
    assert both.combined < theta < benign.combined
    ctx = make_ctx(render_cfg, stub_index, radicals, theta=theta)
    plan = _manual_plan(ctx, base, [(2, "未", "末"), (3, "日", " ")])
    gate = apply_perceptual_gate(plan, ctx)
    assert gate.final_text == "木林末日"
    assert [r.position for r in gate.reverted] == [3]


def test_gate_monotone_in_theta(render_cfg, stub_index, radicals):
    base = "未日海口王田水山大人"
    plan_ctx = make_ctx(render_cfg, stub_index, radicals, replacement_rate=0.9,
                        theta=0.0)
    plan = plan_replacements(base, plan_ctx)
    assert len(plan.replacements) >= 2
    survivors = []
    for theta in [0.0, 0.9, 1.0, 1.05, 1.08, 1.09, 1.2]:
        ctx = make_ctx(render_cfg, stub_index, radicals, theta=theta)
        survivors.append(len(apply_perceptual_gate(plan, ctx).plan.replacements))
    assert survivors == sorted(survivors, reverse=True)


def test_gate_output_satisfies_threshold(render_cfg, stub_index, radicals):
    ctx = make_ctx(render_cfg, stub_index, radicals)
    plan = plan_replacements("未日海口王田水山大人", ctx)
    gate = apply_perceptual_gate(plan, ctx)
    if gate.plan.replacements:
        assert gate.score.combined > ctx.config.theta


# ---------------------------------------------------------------------------
# end-to-end single attacks
# ---------------------------------------------------------------------------

def test_no_candidates_no_op_attack(render_cfg, stub_index, radicals, corpus):
    ctx = make_ctx(render_cfg, stub_index, radicals)
    ctx.candidates_for = lambda ch: CandidateSet.empty(ch)
    src, ref = corpus[0]
    res = run_attack(src, ref, ctx)
    assert res.adversarial == src
    assert res.success is False
    assert res.relative_decrease == 0.0


def test_forced_mock_attack_outcome(render_cfg, stub_index, radicals):
    # Constructed sentence where the outcome is forced by the mock rules:
    # the two rare words carry sensitive chars, the budget allows exactly
    # two replacements, and each junk phrase is two tokens.
    ctx = make_ctx(render_cfg, stub_index, radicals)
    model = load_mock_model()
    src = "木林未日好女水山三千上下"   # 6 words, 12 word-chars, budget 2
    ref = "forest omen lady flood many around"
    res = run_attack(src, ref, ctx)
    assert res.victim_clean == ref
    assert res.bleu_clean.value == 1.0
    assert len(res.plan) == 2
    hit_words = {src[r.position] for r in res.plan}
    assert hit_words <= set("未日水山")
    # every replaced char sits in a sensitive word, so the victim output
    # must contain the junk phrases for the original chars
    for rep in res.plan:
        assert model["sensitivity"][src[rep.position]] in res.victim_adversarial
    assert res.relative_decrease > 0.5
    assert res.success is True


def test_result_is_deterministic(render_cfg, stub_index, radicals, corpus):
    src, ref = corpus[0]
    a = run_attack(src, ref, make_ctx(render_cfg, stub_index, radicals)).to_dict()
    b = run_attack(src, ref, make_ctx(render_cfg, stub_index, radicals)).to_dict()
    assert json.dumps(a, ensure_ascii=False) == json.dumps(b, ensure_ascii=False)


def test_substitution_only_invariant(render_cfg, stub_index, radicals, corpus):
    ctx = make_ctx(render_cfg, stub_index, radicals)
    for src, ref in corpus[:10]:
        res = run_attack(src, ref, ctx)
        assert len(res.adversarial) == len(res.base)
        diff = {i for i, (a, b) in enumerate(zip(res.base, res.adversarial)) if a != b}
        assert diff == {r.position for r in res.plan}


def test_emitted_results_recheck_constraints(render_cfg, stub_index, radicals, corpus):
    ctx = make_ctx(render_cfg, stub_index, radicals)
    for src, ref in corpus[:10]:
        res = run_attack(src, ref, ctx)
        cons = res.constraints()
        assert cons["semantic"]["passed"]
        assert cons["perceptual"]["passed"]
        # recompute clause 3 from scratch
        triples = [(r.position, r.original, r.replacement) for r in res.plan]
        score = sentence_perceptual(res.base, res.adversarial, triples,
                                    ctx.config.epsilon, render_cfg)
        assert score.combined == pytest.approx(res.perceptual.combined, abs=1e-12)


def test_selection_minimizes_source_similarity(render_cfg, stub_index, radicals, corpus):
    ctx = make_ctx(render_cfg, stub_index, radicals, debug_candidates=True)
    for src, ref in corpus[:8]:
        res = run_attack(src, ref, ctx)
        sims = [c["candidate_sim"] for c in res.candidates_log]
        if res.adversarial == src:
            assert all(s >= res.sim_source_adversarial for s in sims)
        else:
            assert res.sim_source_adversarial == min(sims)
            assert res.sim_source_adversarial < 1.0


def test_attack_corpus_parallel_matches_serial(render_cfg, stub_index, radicals, corpus):
    pairs = corpus[:6]
    serial = attack_corpus(pairs, make_ctx(render_cfg, stub_index, radicals), workers=1)
    parallel = attack_corpus(pairs, make_ctx(render_cfg, stub_index, radicals), workers=4)
    assert [r.to_dict() for r in serial] == [r.to_dict() for r in parallel]


def test_apply_replacements_validates_base():
    rep = Replacement(word_index=0, char_index=0, position=0, original="木",
                      replacement="末", source="pix", local_score=1.0)
    with pytest.raises(ValueError):
        apply_replacements("林", [rep])


def test_all_backends_down_still_produces_result(render_cfg, stub_index, radicals, corpus):
    from glyphattack.bundled import attack_segmenter
    from glyphattack.models import BackendEndpoint, BackendSuite, HttpBackend
    ep = BackendEndpoint(base_url="http://127.0.0.1:9", timeout_s=0.2, retries=0)
    suite = BackendSuite(victim=HttpBackend(ep), aux=HttpBackend(ep),
                         mlm=HttpBackend(ep), sim=HttpBackend(ep))
    ctx = AttackContext(config=AttackConfig(), render=render_cfg,
                        backends=suite, index=stub_index, dictionary=radicals,
                        segmenter=attack_segmenter())
    src, ref = corpus[0]
    res = run_attack(src, ref, ctx)
    assert res.incomplete
    assert res.adversarial == src
    assert res.success is False


from hypothesis import given, settings
from hypothesis import strategies as stn

from glyphattack.bundled import load_mock_model

_LEX_WORDS = sorted(load_mock_model()["lexicon"])


@settings(max_examples=30, deadline=None)
@given(stn.lists(stn.sampled_from(_LEX_WORDS), min_size=1, max_size=8),
       stn.sampled_from([0.0, 0.05, 0.1, 0.2, 0.4, 0.8]))
def test_planner_invariants_hold_for_any_corpus(render_cfg, stub_index, radicals,
                                                words, rate):
    ctx = make_ctx(render_cfg, stub_index, radicals, replacement_rate=rate)
    text = "".join(words)
    plan = plan_replacements(text, ctx)
    counts = plan.per_word_counts()
    assert all(v <= 1 for v in counts.values())
    if plan.replacements:
        assert len(plan.replacements) / plan.total_word_chars < rate
    # applying the plan is substitution-only and reversible
    applied = plan.apply()
    assert len(applied) == len(text)
    for rep in plan.replacements:
        assert applied[rep.position] == rep.replacement
        assert text[rep.position] == rep.original
