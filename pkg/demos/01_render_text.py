"""Rendering text to bitmaps.

Characters are drawn into fixed-size cells; a sentence is the horizontal
concatenation of its character cells.  That cell discipline is what makes
per-character perceptual reasoning possible later: editing character i
touches exactly the pixel columns of cell i.
"""

import numpy as np

from glyphattack import RenderConfig, mse, render_char, render_sentence

cfg = RenderConfig()
print("geometry digest:", cfg.digest()[:16], "...")
print("cell: %dx%d px at font size %d" % (cfg.cell_width, cfg.cell_height, cfg.font_size))

# Render one character and look at it as ASCII art.
bmp = render_char("未", cfg)
print("\n'未' as a %dx%d bitmap:" % (bmp.height, bmp.width))
for row in bmp.pixels:
    print("".join("#" if v > 0.5 else ("+" if v > 0.1 else ".") for v in row))

# Rendering is deterministic: same text, same config, same pixels.
again = render_char("未", cfg)
print("\ndeterministic:", np.array_equal(bmp.pixels, again.pixels))

# The canonical near-pair: 未 and 末 differ only in stroke proportions,
# while 海 is a completely different shape.
wei, mo, hai = (render_char(c, cfg) for c in "未末海")
print("MSE(未, 末) = %.5f   (visually close)" % mse(wei, mo))
print("MSE(未, 海) = %.5f   (visually far)" % mse(wei, hai))

# Sentences concatenate cells; an edit stays inside its own cell.
a = render_sentence("木林未日上下", cfg)
b = render_sentence("木林末日上下", cfg)
changed = np.nonzero(np.any(a.pixels != b.pixels, axis=0))[0]
print("\nsentence width: %d px (%d chars)" % (a.width, len(a.text)))
print("edited char 2: changed pixel columns %d..%d (cell 2 spans %d..%d)"
      % (changed.min(), changed.max(), 2 * cfg.cell_width, 3 * cfg.cell_width - 1))

# Dump PNGs for visual inspection.
a.save_png("clean.png")
b.save_png("adversarial.png")
print("\nwrote clean.png and adversarial.png")
