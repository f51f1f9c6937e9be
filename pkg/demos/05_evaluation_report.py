"""Corpus evaluation and offline auditing.

The harness re-derives BLEU from the recorded victim outputs (it never
trusts producer-recorded scores), marks success at relative decrease >
alpha, measures imperceptibility as SSIM between the sentence renders, and
emits CSV + JSON reports.  The auditor then re-verifies every recorded
constraint from the result records alone.
"""

from glyphattack import (AttackConfig, AttackContext, RenderConfig,
                         attack_corpus, build_pixel_index, evaluate)
from glyphattack.audit import verify_records
from glyphattack.bundled import (attack_segmenter, load_corpus, load_radicals,
                                 mock_backend_suite, stub_charset)

render = RenderConfig()
ctx = AttackContext(config=AttackConfig(), render=render,
                    backends=mock_backend_suite(),
                    index=build_pixel_index(stub_charset(), render),
                    dictionary=load_radicals(),
                    segmenter=attack_segmenter())

results = attack_corpus(load_corpus(), ctx)
records = [r.to_dict() for r in results]

report = evaluate(records, render, alpha=0.5)
print("rows                :", len(report.rows))
print("mean BLEU clean/adv : %.4f -> %.4f" % (report.mean_bleu_clean,
                                              report.mean_bleu_adv))
print("corpus BLEU clean/adv: %.4f -> %.4f" % (report.corpus_bleu_clean,
                                               report.corpus_bleu_adv))
print("attack success rate : %.3f" % report.asr)
print("mean render SSIM    : %.4f   (imperceptibility)" % report.mean_ssim)
print("zero-baseline rows  :", report.zero_baseline_count)
print("metrics             :", report.metric_ids)

report.write_csv("report.csv")
report.write_json("report.json")
print("\nwrote report.csv / report.json")

# Every emitted record must re-verify offline: substitution discipline,
# BLEU pair, all three constraint clauses including a re-render of the
# perceptual score.
clean, findings = verify_records(records)
print("\naudit: %d/%d records clean, %d findings" % (clean, len(records),
                                                     len(findings)))

# The auditor is not decorative: tamper with one record and it notices.
records[0]["relative_decrease"] = 0.99
_, findings = verify_records(records[:1])
print("after tampering with one field: %d finding(s):" % len(findings))
for f in findings:
    print("  ", f)
