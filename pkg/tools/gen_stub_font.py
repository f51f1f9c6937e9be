#!/usr/bin/env python3
"""Generate the bundled CJK stub font (cjkstub.ttf).

The repository needs a redistributable font that covers the CJK characters
used by the bundled demo corpus, the radical table and the test suite.  No
freely redistributable full CJK font is vendored here; instead we build a
small TrueType font whose glyphs are stroke skeletons drawn from a compact
stroke table below.  The shapes are crude but deliberately engineered so
that visually-kin character families (未/末, 日/目, 己/已/巳, ...) really do
rasterize to nearby bitmaps while unrelated characters land far apart.

Usage:
    python tools/gen_stub_font.py [--out src/glyphattack/data/cjkstub.ttf]

The output is committed; rerunning the script reproduces it byte-for-byte
(fixed timestamps, fixed glyph order).
"""

import argparse
import math

from fontTools.fontBuilder import FontBuilder
from fontTools.pens.ttGlyphPen import TTGlyphPen

UPEM = 1000
ASCENT = 880
DESCENT = 120
STROKE = 56  # half-thickness 28


def _quad(pen, pts):
    pen.moveTo(pts[0])
    for p in pts[1:]:
        pen.lineTo(p)
    pen.closePath()


def H(y, x1, x2, t=STROKE):
    """Horizontal bar."""
    h = t / 2
    return [(x1, y - h), (x2, y - h), (x2, y + h), (x1, y + h)]


def V(x, y1, y2, t=STROKE):
    """Vertical bar."""
    h = t / 2
    return [(x - h, y1), (x + h, y1), (x + h, y2), (x - h, y2)]


def L(x1, y1, x2, y2, t=STROKE):
    """Thick line segment between two points (diagonal strokes)."""
    dx, dy = x2 - x1, y2 - y1
    n = math.hypot(dx, dy) or 1.0
    ox, oy = -dy / n * t / 2, dx / n * t / 2
    return [(x1 + ox, y1 + oy), (x2 + ox, y2 + oy), (x2 - ox, y2 - oy), (x1 - ox, y1 - oy)]


def DOT(x, y, r=44):
    return [(x - r, y - r), (x + r, y - r), (x + r, y + r), (x - r, y + r)]


def BOX(x1, y1, x2, y2, t=STROKE):
    """Rectangular outline made of four bars."""
    return [H(y2 - t / 2, x1, x2, t), H(y1 + t / 2, x1, x2, t),
            V(x1 + t / 2, y1, y2, t), V(x2 - t / 2, y1, y2, t)]


def flat(*parts):
    out = []
    for p in parts:
        if p and isinstance(p[0], list):
            out.extend(p)
        else:
            out.append(p)
    return out


# Stroke tables.  Families sharing geometry are grouped; shared strokes are
# written out explicitly so that e.g. 未 and 末 differ only in the lengths of
# the two horizontals.
GLYPHS = {
    # -- numerals / simple bars -------------------------------------------
    "一": flat(H(400, 100, 900)),
    "二": flat(H(560, 150, 850), H(240, 100, 900)),
    "三": flat(H(640, 150, 850), H(420, 200, 800), H(200, 100, 900)),
    "十": flat(H(430, 100, 900), V(500, 60, 780)),
    "干": flat(H(640, 200, 800), H(390, 100, 900), V(500, -30, 640)),
    "千": flat(L(640, 700, 380, 630), H(420, 100, 900), V(500, -30, 630)),
    "于": flat(H(640, 200, 800), H(420, 100, 900), V(540, -30, 420)),
    "上": flat(V(450, 120, 740), H(470, 450, 800), H(120, 100, 900)),
    "下": flat(H(720, 100, 900), V(500, -20, 720), L(520, 480, 680, 330)),
    "卜": flat(V(450, -20, 780), L(460, 450, 660, 320)),
    "卡": flat(H(650, 200, 800), V(500, -30, 800), H(380, 120, 880), L(540, 300, 680, 170)),
    # -- mouth / sun boxes -------------------------------------------------
    "口": flat(BOX(200, 80, 800, 620)),
    "中": flat(BOX(220, 260, 780, 640), V(500, -20, 840)),
    "日": flat(BOX(250, 40, 750, 760), H(400, 250, 750)),
    "目": flat(BOX(250, 0, 750, 780), H(520, 250, 750), H(260, 250, 750)),
    "曰": flat(BOX(220, 160, 780, 700), H(430, 220, 780)),
    "旦": flat(BOX(280, 240, 720, 760), H(500, 280, 720), H(80, 120, 880)),
    "白": flat(L(500, 850, 420, 740), BOX(250, 40, 750, 700), H(380, 250, 750)),
    "百": flat(H(770, 100, 900), BOX(270, 0, 730, 620), H(320, 270, 730)),
    "自": flat(L(500, 860, 430, 770), BOX(250, 0, 750, 740), H(500, 250, 750), H(260, 250, 750)),
    # -- field boxes --------------------------------------------------------
    "田": flat(BOX(200, 60, 800, 700), H(380, 200, 800), V(500, 60, 700)),
    "由": flat(BOX(200, 40, 800, 680), H(360, 200, 800), V(500, 40, 860)),
    "甲": flat(BOX(200, 220, 800, 820), H(520, 200, 800), V(500, -40, 820)),
    "申": flat(BOX(220, 220, 780, 760), H(490, 220, 780), V(500, -40, 860)),
    "只": flat(BOX(260, 340, 740, 800), L(380, 280, 260, 60), L(620, 280, 740, 60)),
    # -- person strokes ------------------------------------------------------
    "人": flat(L(500, 800, 230, -20), L(500, 800, 770, -20)),
    "入": flat(L(470, 800, 740, -20), L(520, 700, 260, -20)),
    "八": flat(L(420, 640, 250, -20), L(580, 640, 750, -20)),
    "个": flat(L(500, 820, 240, 360), L(500, 820, 760, 360), V(500, -30, 560)),
    # -- big strokes ---------------------------------------------------------
    "大": flat(H(520, 120, 880), L(500, 820, 220, -30), L(500, 520, 780, -30)),
    "太": flat(H(520, 120, 880), L(500, 820, 220, -30), L(500, 520, 780, -30), DOT(560, 80)),
    "犬": flat(H(520, 120, 880), L(500, 820, 220, -30), L(500, 520, 780, -30), DOT(720, 660)),
    "天": flat(H(700, 160, 840), H(460, 120, 880), L(490, 460, 220, -30), L(510, 460, 780, -30)),
    "夫": flat(H(680, 180, 820), H(440, 120, 880), L(500, 820, 230, -30), L(500, 440, 770, -30)),
    # -- wood family (intended 未/末 near-pair) -------------------------------
    "木": flat(H(560, 120, 880), V(500, -30, 820), L(460, 520, 220, 180), L(540, 520, 780, 180)),
    "未": flat(H(700, 250, 750), H(480, 120, 880), V(500, -30, 820), L(460, 440, 250, 160), L(540, 440, 750, 160)),
    "末": flat(H(700, 120, 880), H(480, 250, 750), V(500, -30, 820), L(460, 440, 250, 160), L(540, 440, 750, 160)),
    "本": flat(H(560, 120, 880), V(500, -30, 820), L(460, 520, 220, 180), L(540, 520, 780, 180), H(120, 330, 670)),
    "术": flat(H(560, 120, 880), V(500, -30, 820), L(460, 520, 220, 180), L(540, 520, 780, 180), DOT(700, 650)),
    "林": flat(H(560, 80, 460, 40), V(270, -30, 820, 40), L(240, 520, 110, 200, 40), L(300, 520, 440, 200, 40),
               H(560, 540, 920, 40), V(730, -30, 820, 40), L(700, 520, 570, 200, 40), L(760, 520, 900, 200, 40)),
    # -- king / earth ---------------------------------------------------------
    "王": flat(H(700, 180, 820), H(430, 200, 800), H(120, 140, 860), V(500, 120, 700)),
    "玉": flat(H(700, 180, 820), H(430, 200, 800), H(120, 140, 860), V(500, 120, 700), DOT(640, 260)),
    "主": flat(DOT(500, 800), H(680, 180, 820), H(420, 200, 800), H(120, 140, 860), V(500, 120, 680)),
    "土": flat(H(500, 200, 800), H(120, 120, 880), V(500, 120, 760)),
    "士": flat(H(520, 140, 860), H(120, 220, 780), V(500, 120, 780)),
    "工": flat(H(680, 160, 840), H(140, 120, 880), V(500, 140, 680)),
    # -- mountain -------------------------------------------------------------
    "山": flat(V(500, 200, 820), V(220, 200, 580), V(780, 200, 580), H(200, 220, 780)),
    "出": flat(V(500, 100, 860), V(250, 500, 760), V(750, 500, 760), H(480, 250, 750),
               V(170, 100, 420), V(830, 100, 420), H(120, 170, 830)),
    # -- water family -----------------------------------------------------------
    "水": flat(V(500, -30, 820), L(430, 560, 210, 300), L(570, 560, 790, 300), L(430, 260, 230, 40), L(570, 260, 770, 40)),
    "永": flat(DOT(500, 840), V(500, -30, 760), L(430, 540, 210, 300), L(570, 540, 790, 300), L(430, 250, 230, 40), L(570, 250, 770, 40)),
    "氵": flat(DOT(320, 660), DOT(250, 440), L(230, 250, 400, 40)),
    "每": flat(L(420, 820, 320, 680), H(710, 280, 780), BOX(240, 60, 760, 600), H(330, 240, 760), DOT(500, 460)),
    "海": flat(DOT(170, 650), DOT(130, 440), L(120, 250, 260, 60),
               L(540, 810, 460, 690), H(700, 420, 900), BOX(410, 80, 890, 580), H(330, 410, 890), DOT(650, 450)),
    "河": flat(DOT(170, 650), DOT(130, 440), L(120, 250, 260, 60),
               H(720, 380, 920), BOX(460, 260, 740, 560), V(880, -20, 720)),
    "江": flat(DOT(170, 650), DOT(130, 440), L(120, 250, 260, 60),
               H(660, 400, 900), H(130, 360, 940), V(650, 160, 660)),
    # -- moon ---------------------------------------------------------------------
    "月": flat(V(290, -30, 780), V(710, -30, 780), H(740, 290, 710), H(500, 290, 710), H(260, 290, 710)),
    "用": flat(V(260, -30, 780), V(740, -30, 780), H(740, 260, 740), H(490, 260, 740), H(240, 260, 740), V(500, -30, 740)),
    # -- knife ----------------------------------------------------------------------
    "刀": flat(H(700, 220, 840), V(780, 240, 700), L(520, 700, 240, -20)),
    "力": flat(H(660, 200, 860), L(480, 660, 220, -30), V(720, 60, 660)),
    "刃": flat(H(700, 220, 840), V(780, 240, 700), L(520, 700, 240, -20), DOT(420, 300)),
    # -- self family -------------------------------------------------------------------
    "己": flat(H(740, 250, 750), V(730, 500, 740), H(490, 250, 750), V(260, 40, 490), H(40, 260, 830)),
    "已": flat(H(740, 250, 750), V(730, 500, 740), H(490, 250, 750), V(260, 40, 620), H(40, 260, 830)),
    "巳": flat(H(740, 250, 750), V(730, 500, 740), H(490, 250, 750), V(260, 40, 740), H(40, 260, 830)),
    # -- fillers used by the demo corpus -------------------------------------------------
    "的": flat(L(300, 830, 250, 730), BOX(130, 200, 450, 700), H(450, 130, 450),
               L(690, 830, 580, 680), H(650, 540, 900), V(860, 200, 650), DOT(710, 380)),
    "是": flat(BOX(300, 540, 700, 840), H(690, 300, 700), H(460, 200, 800), V(430, 160, 460),
               H(300, 430, 720), L(400, 160, 240, -20), H(-10, 140, 860)),
    "子": flat(H(720, 240, 760), L(700, 720, 430, 520), V(500, -40, 560), H(420, 100, 900)),
    "女": flat(L(400, 760, 250, 100), L(400, 760, 640, 100, 60), L(640, 760, 380, 100, 60), H(430, 120, 880)),
    "马": flat(H(760, 220, 760), V(720, 200, 760), H(460, 240, 720), V(260, 460, 760),
               H(200, 150, 850), V(810, 40, 200), DOT(700, 110)),
    "好": flat(L(280, 740, 170, 180, 50), L(280, 740, 430, 200, 50), L(430, 700, 220, 260, 50), H(470, 110, 450, 50),
               H(700, 560, 920, 50), L(880, 700, 680, 520, 50), V(740, -30, 540, 50), H(420, 520, 960, 50)),
}


def build(out_path):
    chars = sorted(GLYPHS)  # codepoint order for a stable glyph order
    fb = FontBuilder(UPEM, isTTF=True)
    glyph_order = [".notdef"] + ["uni%04X" % ord(c) for c in chars]
    fb.setupGlyphOrder(glyph_order)
    fb.setupCharacterMap({ord(c): "uni%04X" % ord(c) for c in chars})

    glyphs = {}
    pen = TTGlyphPen(None)
    _quad(pen, [(80, 0), (920, 0), (920, 800), (80, 800)])
    glyphs[".notdef"] = pen.glyph()
    for c in chars:
        pen = TTGlyphPen(None)
        for poly in GLYPHS[c]:
            _quad(pen, [(round(x), round(y)) for x, y in poly])
        glyphs["uni%04X" % ord(c)] = pen.glyph()
    fb.setupGlyf(glyphs)
    metrics = {name: (UPEM, glyphs[name].xMin if hasattr(glyphs[name], "xMin") else 0)
               for name in glyph_order}
    fb.setupHorizontalMetrics(metrics)
    fb.setupHorizontalHeader(ascent=ASCENT, descent=-DESCENT)
    fb.setupNameTable({"familyName": "CJK Stub", "styleName": "Regular",
                       "psName": "CJKStub-Regular"})
    fb.setupOS2(sTypoAscender=ASCENT, sTypoDescender=-DESCENT, usWinAscent=ASCENT,
                usWinDescent=DESCENT)
    fb.setupPost()
    # freeze timestamps so rebuilds are byte-identical
    fb.font["head"].created = 0
    fb.font["head"].modified = 0
    fb.save(out_path)
    print("wrote %s (%d chars)" % (out_path, len(chars)))


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="src/glyphattack/data/cjkstub.ttf")
    args = ap.parse_args()
    build(args.out)
