"""Attacking the bundled demo corpus with the mock backends.

The bundled mock translator behaves like a brittle NMT system: swapping a
character inside one of its sensitive words derails that word's
translation, while swaps elsewhere are read through robustly.  The attack
pipeline finds those sensitive positions on its own: rare words rank first
under masked-LM importance, visual candidates come from the glyph index,
and every substitution must clear the perceptual gate.
"""

from glyphattack import (AttackConfig, AttackContext, RenderConfig,
                         attack_corpus, build_pixel_index)
from glyphattack.bundled import (attack_segmenter, load_corpus, load_radicals,
                                 mock_backend_suite, stub_charset)

render = RenderConfig()
config = AttackConfig()          # alpha 0.5, theta 0.95, r 0.2, eps 0.01
print("attack config: alpha=%g beta=%g theta=%g epsilon=%g r=%g m=%d k=%d"
      % (config.alpha, config.beta, config.theta, config.epsilon,
         config.replacement_rate, config.top_m, config.top_k))

ctx = AttackContext(config=config, render=render,
                    backends=mock_backend_suite(),
                    index=build_pixel_index(stub_charset(), render),
                    dictionary=load_radicals(),
                    segmenter=attack_segmenter())

pairs = load_corpus()
results = attack_corpus(pairs, ctx)

asr = sum(r.success for r in results) / len(results)
print("\nattacked %d sentences, ASR = %.3f" % (len(results), asr))

print("\nthree examples:")
for res in results[:3]:
    print("\n  source     :", res.source)
    print("  adversarial:", res.adversarial)
    swaps = ", ".join("%s->%s (%s)" % (r.original, r.replacement, r.source)
                      for r in res.plan)
    print("  swaps      :", swaps or "(none)")
    print("  victim clean:", res.victim_clean)
    print("  victim adv  :", res.victim_adversarial)
    print("  BLEU %.3f -> %.3f  (relative decrease %.2f)  success=%s"
          % (res.bleu_clean.value, res.bleu_adversarial.value,
             res.relative_decrease, res.success))
    print("  perceptual combined %.4f (theta %.2f)"
          % (res.perceptual.combined, config.theta))

# A control sentence built only from robust filler words resists the attack.
controls = [r for r in results if not r.success]
if controls:
    res = controls[0]
    print("\na robust sentence (filler words only):")
    print("  source     :", res.source)
    print("  adversarial:", res.adversarial)
    print("  victim output unchanged:", res.victim_clean == res.victim_adversarial)
