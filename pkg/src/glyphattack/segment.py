"""Word segmentation for replacement planning.

Replacement constraints are phrased per word, so the attack needs a word
segmentation of the source sentence.  Two interchangeable segmenters are
provided: whitespace splitting for languages that mark word boundaries, and
greedy longest-match against a word list (per-character fallback) for CJK
text.  Any object with a ``segment(text) -> list[Token]`` method works.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass


@dataclass(frozen=True)
class Token:
    start: int
    text: str
    is_word: bool

    @property
    def end(self):
        return self.start + len(self.text)


def _is_word_char(ch):
    cat = unicodedata.category(ch)
    return not (cat.startswith("P") or cat.startswith("Z") or cat.startswith("C"))


class WhitespaceSegmenter:
    """Words are maximal runs of non-space characters."""

    def segment(self, text):
        tokens = []
        i = 0
        n = len(text)
        while i < n:
            if text[i].isspace():
                j = i
                while j < n and text[j].isspace():
                    j += 1
                tokens.append(Token(i, text[i:j], False))
                i = j
            else:
                j = i
                while j < n and not text[j].isspace():
                    j += 1
                run = text[i:j]
                tokens.append(Token(i, run, any(_is_word_char(c) for c in run)))
                i = j
        return tokens


class LongestMatchSegmenter:
    """Greedy longest-match against a word list, per-char fallback.

    Unmatched characters become single-character tokens; they count as words
    unless they are punctuation, separators or control characters.
    """

    def __init__(self, words):
        self._words = set(words)
        self._max_len = max((len(w) for w in self._words), default=1)

    def segment(self, text):
        tokens = []
        i = 0
        n = len(text)
        while i < n:
            match = None
            for length in range(min(self._max_len, n - i), 1, -1):
                cand = text[i:i + length]
                if cand in self._words:
                    match = cand
                    break
            if match is None:
                ch = text[i]
                tokens.append(Token(i, ch, ch in self._words or _is_word_char(ch)))
                i += 1
            else:
                tokens.append(Token(i, match, True))
                i += len(match)
        return tokens


def words_of(segmenter, text):
    return [t for t in segmenter.segment(text) if t.is_word]
