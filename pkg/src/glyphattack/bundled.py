"""Access to the bundled data: stub font, mock model, demo corpus, radicals.

Everything needed to run the whole pipeline offline lives in the data/
directory: a small generated CJK font, a curated component-decomposition
table for its charset, a deterministic mock translation model and a
50-sentence demo corpus engineered with sensitive characters.
"""

from __future__ import annotations

import json
import os

from .models import BackendSuite, MockMaskedLM, MockSentenceSim, MockTranslator
from .segment import LongestMatchSegmenter
from .simindex import GlyphDictionary

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
STUB_FONT = os.path.join(DATA_DIR, "cjkstub.ttf")
MOCK_MODEL_JSON = os.path.join(DATA_DIR, "mock_model.json")
MOCK_CORPUS_TSV = os.path.join(DATA_DIR, "mock_corpus.tsv")
RADICALS_TSV = os.path.join(DATA_DIR, "radicals_zh.tsv")


class _Chunk2Segmenter:
    """Fixed two-character chunking used by the mock victim.

    The demo corpus consists solely of two-character words, so chunking is a
    correct segmentation that keeps working after character substitutions
    (substitution never changes sentence length).
    """

    def segment(self, text):
        from .segment import Token
        return [Token(i, text[i:i + 2], True) for i in range(0, len(text) - 1, 2)] + \
            ([Token(len(text) - 1, text[-1], True)] if len(text) % 2 else [])


def load_mock_model(path=MOCK_MODEL_JSON):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def mock_backend_suite(path=MOCK_MODEL_JSON) -> BackendSuite:
    model = load_mock_model(path)
    translator = MockTranslator(lexicon=model["lexicon"],
                                sensitivity=model["sensitivity"],
                                segmenter=_Chunk2Segmenter(),
                                src_lang=model["src_lang"],
                                tgt_lang=model["tgt_lang"])
    return BackendSuite(victim=translator, aux=translator,
                        mlm=MockMaskedLM(model["frequencies"]),
                        sim=MockSentenceSim(),
                        perceptual=None,
                        src_lang=model["src_lang"], tgt_lang=model["tgt_lang"])


def attack_segmenter(path=MOCK_MODEL_JSON) -> LongestMatchSegmenter:
    """Greedy longest-match segmenter over the bundled word list."""
    return LongestMatchSegmenter(load_mock_model(path)["lexicon"].keys())


def load_corpus(path=MOCK_CORPUS_TSV):
    from .errors import ParseError
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ParseError(path, line_no,
                                 "expected <source>\\t<reference> with both non-empty")
            pairs.append((parts[0], parts[1]))
    return pairs


def load_radicals(path=RADICALS_TSV) -> GlyphDictionary:
    return GlyphDictionary.load(path)


def stub_charset():
    """All characters covered by the bundled stub font, codepoint order."""
    from fontTools.ttLib import TTFont
    tt = TTFont(STUB_FONT, lazy=True)
    cps = sorted(tt.getBestCmap().keys())
    tt.close()
    return [chr(cp) for cp in cps]
