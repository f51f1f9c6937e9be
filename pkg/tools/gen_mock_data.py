#!/usr/bin/env python3
"""Generate the bundled mock model and demo corpus.

Writes three committed artifacts under src/glyphattack/data/:

  mock_model.json  lexicon, sensitivity table and word frequencies for the
                   deterministic mock backends
  mock_corpus.tsv  50 source/reference pairs engineered so that sentences
                   carrying sensitive characters are reliably attackable
  radicals_zh.tsv  curated component decompositions for the stub charset

Design notes:
  * every lexicon word is exactly two characters and no character appears
    in more than one lexicon word, so a one-character substitution always
    has a unique nearest lexicon word;
  * the visual-neighbor pool (characters the glyph index is likely to pick
    as replacements) is disjoint from the lexicon charset;
  * "sensitive" characters translate to two-token junk when substituted,
    filler words are read through robustly.

Rerunning the script reproduces the same bytes (fixed seed).
"""

import json
import os
import random

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "glyphattack", "data")

# word -> gloss; the first block is rare/sensitive, the second frequent filler
SENSITIVE_WORDS = {
    "未日": "omen",
    "海口": "harbor",
    "王田": "kingdom",
    "水山": "flood",
    "大人": "giant",
    "己甲": "armor",
    "月申": "eclipse",
    "刀中": "blade",
}

FILLER_WORDS = {
    "木林": "forest",
    "好女": "lady",
    "三千": "many",
    "上下": "around",
    "的是": "indeed",
    "子马": "foal",
    "十百": "hundreds",
    "一二": "few",
    "八个": "eight",
    "只由": "reason",
    "入干": "enter",
    "于卜": "divine",
    "卡每": "cards",
}

# char -> junk phrase emitted when that character is swapped inside its word
SENSITIVITY = {
    "未": "krz vlon", "日": "blik trosk", "海": "zmur gla", "口": "pleth vun",
    "王": "drak smol", "田": "grib nox", "水": "flem dur", "山": "tolk brang",
    "大": "shex wold", "人": "quil marn", "己": "zot prell", "甲": "vrim kast",
    "月": "nub tarel", "申": "hasp wrun", "刀": "cleft borin", "中": "yex saldo",
}

FREQUENCIES = {
    "一二": 180, "的是": 150, "上下": 120, "好女": 110, "三千": 95,
    "子马": 80, "木林": 70, "十百": 60, "八个": 55, "只由": 50,
    "入干": 45, "于卜": 40, "卡每": 35,
    "未日": 8, "海口": 7, "王田": 6, "水山": 5, "大人": 4,
    "己甲": 3, "月申": 2, "刀中": 1,
}

# curated first-level component decompositions for the stub charset
RADICALS = {
    "一": "一", "二": "一", "三": "一", "十": "十", "干": "干,一,十",
    "千": "十,丿", "于": "干,一", "上": "一,卜", "下": "一,卜", "卜": "卜",
    "卡": "卜,一",
    "口": "口", "中": "口,丨", "日": "日", "目": "目,日", "曰": "日",
    "旦": "日,一", "白": "日,丿", "百": "一,白,日", "自": "目,丿",
    "田": "田", "由": "田,丨", "甲": "田,丨", "申": "田,丨", "只": "口,八",
    "人": "人", "入": "人", "八": "八", "个": "人,丨",
    "大": "大", "太": "大,丶", "犬": "大,丶", "天": "一,大", "夫": "一,大",
    "木": "木", "未": "木,一", "末": "木,一", "本": "木,一", "术": "木,丶",
    "林": "木",
    "王": "王", "玉": "王,丶", "主": "王,丶", "土": "土", "士": "土",
    "工": "工",
    "山": "山", "出": "山",
    "水": "水", "永": "水,丶", "氵": "水", "每": "母,人", "海": "水,氵,每",
    "河": "水,氵,可", "江": "水,氵,工",
    "月": "月", "用": "月,丨",
    "刀": "刀", "力": "刀,丿", "刃": "刀,丶",
    "己": "己", "已": "己", "巳": "己",
    "的": "白,日,勺", "是": "日,正", "子": "子", "女": "女", "马": "马",
    "好": "女,子",
}


def build_corpus(lexicon, rng):
    """50 sentences: mostly 2 sensitive + 4-6 filler words, 5 all-filler."""
    sensitive = sorted(SENSITIVE_WORDS)
    fillers = sorted(FILLER_WORDS)
    lines = []
    for i in range(50):
        if i % 10 == 9:  # control sentence, nothing sensitive
            words = rng.sample(fillers, 6)
        else:
            n_sens = 3 if i % 7 == 3 else 2
            n_fill = rng.choice([4, 4, 5, 6])
            words = rng.sample(sensitive, n_sens) + rng.sample(fillers, n_fill)
            rng.shuffle(words)
        source = "".join(words)
        reference = " ".join(lexicon[w] for w in words)
        lines.append((source, reference))
    return lines


def main():
    rng = random.Random(20240611)
    lexicon = {}
    lexicon.update(SENSITIVE_WORDS)
    lexicon.update(FILLER_WORDS)

    # invariants the mock design relies on
    all_chars = [c for w in lexicon for c in w]
    assert len(all_chars) == len(set(all_chars)), "lexicon chars must be unique"
    assert len(set(lexicon.values())) == len(lexicon), "glosses must be unique"
    assert all(len(w) == 2 for w in lexicon), "victim segmentation assumes 2-char words"

    model = {
        "src_lang": "zh",
        "tgt_lang": "en",
        "victim_segmentation": "chunk2",
        "lexicon": dict(sorted(lexicon.items())),
        "sensitivity": dict(sorted(SENSITIVITY.items())),
        "frequencies": dict(sorted(FREQUENCIES.items())),
    }
    with open(os.path.join(OUT_DIR, "mock_model.json"), "w", encoding="utf-8") as fh:
        json.dump(model, fh, ensure_ascii=False, indent=1, sort_keys=True)
        fh.write("\n")

    corpus = build_corpus(lexicon, rng)
    with open(os.path.join(OUT_DIR, "mock_corpus.tsv"), "w", encoding="utf-8") as fh:
        for src, ref in corpus:
            fh.write("%s\t%s\n" % (src, ref))

    with open(os.path.join(OUT_DIR, "radicals_zh.tsv"), "w", encoding="utf-8") as fh:
        fh.write("# char <TAB> comma-separated components (curated for the stub charset)\n")
        for ch in sorted(RADICALS):
            fh.write("%s\t%s\n" % (ch, RADICALS[ch]))

    print("wrote mock_model.json (%d words), mock_corpus.tsv (%d lines), radicals_zh.tsv (%d chars)"
          % (len(lexicon), len(corpus), len(RADICALS)))


if __name__ == "__main__":
    main()
