"""Finding visually similar replacement candidates.

Two sources feed the candidate set of a character:

  * radical search: characters that share a structural component,
    looked up in a decomposition table;
  * pixel search: cosine top-m over rendered cells, re-ranked by MSE
    and truncated to k.

The union, tagged with provenance, is what the attack substitutes from.
"""

from glyphattack import (RenderConfig, build_pixel_index, merge_candidates,
                         pixel_candidates, radical_candidates)
from glyphattack.bundled import load_radicals, stub_charset

cfg = RenderConfig()
chars = stub_charset()
print("repertoire: %d characters from the bundled stub font" % len(chars))

index = build_pixel_index(chars, cfg)
print("index digest matches config:", index.geometry_digest == cfg.digest())

dictionary = load_radicals()

for origin in ["未", "海", "己"]:
    rad = radical_candidates(origin, dictionary)
    pix = pixel_candidates(origin, index, cfg, m=20, k=6)
    merged = merge_candidates(origin, rad, pix)
    print("\ncandidates for %r  (radical: %d, pixel top-6, merged: %d)"
          % (origin, len(rad), len(merged)))
    for cand in merged.candidates[:10]:
        if cand.mse is not None:
            print("   %s  %-4s cosine=%.4f  mse=%.5f"
                  % (cand.char, cand.source, cand.cosine, cand.mse))
        else:
            print("   %s  %-4s (radical only)" % (cand.char, cand.source))

# Persist and reload: the file format embeds the render geometry, so an
# index can never be queried under a different font stack or cell size.
index.save("stub.idx")
from glyphattack import PixelIndex
loaded = PixelIndex.load("stub.idx")
print("\nsaved stub.idx, reload matches:",
      loaded.repertoire == index.repertoire)
