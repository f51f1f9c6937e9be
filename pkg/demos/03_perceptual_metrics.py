"""Perceptual scoring: from pixel metrics to the sentence-level gate.

The sentence score combines a global term (full-sentence perceptual
similarity) with an epsilon-weighted sum of per-character terms.  The
attack only keeps a replacement while the combined score stays above the
threshold theta.
"""

from glyphattack import (RenderConfig, cosine, mse, msssim, render_char,
                         sentence_perceptual, ssim)

cfg = RenderConfig()

pairs = [("未", "末"), ("己", "已"), ("水", "永"), ("日", "目"), ("未", "海")]
print("pixel metrics on character pairs:")
print("  pair      mse      cosine   ssim     msssim")
for a, b in pairs:
    ba, bb = render_char(a, cfg), render_char(b, cfg)
    print("  %s %s   %.5f  %.4f   %.4f   %.4f"
          % (a, b, mse(ba, bb), cosine(ba, bb), ssim(ba, bb), msssim(ba, bb)))

# Sentence-level: one benign swap barely moves the score, a gross swap
# (here: toward a structurally unrelated glyph) costs much more.
x = "木林未日上下"
for replacement, label in [("末", "benign (未->末)"), ("海", "gross (未->海)")]:
    xd = x[:2] + replacement + x[3:]
    s = sentence_perceptual(x, xd, [(2, "未", replacement)], epsilon=0.01, cfg=cfg)
    print("\n%s:" % label)
    print("  global=%.4f  local_sum=%.4f  combined=%.4f  metric=%s"
          % (s.global_term, s.local_sum, s.combined, s.metric))

# The identity always dominates: any substitution can only lower the score.
identity = sentence_perceptual(x, x, [], 0.01, cfg)
print("\nidentity combined score (the attainable maximum): %.4f" % identity.combined)

# The combination is exactly linear in epsilon.
s1 = sentence_perceptual(x, x[:2] + "末" + x[3:], [(2, "未", "末")], 0.0, cfg)
s2 = sentence_perceptual(x, x[:2] + "末" + x[3:], [(2, "未", "末")], 0.5, cfg)
print("combined(eps=0)   = %.6f  (= global term)" % s1.combined)
print("combined(eps=0.5) = %.6f  (= global + 0.5 * local sum)" % s2.combined)
