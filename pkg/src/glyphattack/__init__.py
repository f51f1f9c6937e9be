"""Glyph-substitution adversarial text generation against translation models.

The pipeline rasterizes characters to bitmaps, searches visually similar
replacement candidates (shared-radical lookup plus pixel-space retrieval),
substitutes at most one character per word under a strict replacement-rate
bound, gates every substitution on a sentence-level perceptual score, and
evaluates the damage with smoothed BLEU, attack success rate and SSIM.
"""

from .attack import (AttackConfig, AttackContext, AttackResult, Replacement,
                     ReplacementPlan, apply_perceptual_gate, attack_corpus,
                     expand_solution_space, plan_replacements, run_attack)
from .audit import verify_records
from .conformance import run_conformance
from .evalharness import EvalReport, evaluate, tokenize_en
from .glyph import GlyphBitmap, RenderConfig, render_char, render_sentence
from .metrics import (BleuScore, PerceptualScore, bleu, corpus_bleu, cosine,
                      mse, msssim, perceptual_similarity, sentence_perceptual,
                      ssim)
from .models import (BackendEndpoint, BackendSuite, HttpBackend, MockMaskedLM,
                     MockSentenceSim, MockTranslator, reverse_translations)
from .segment import LongestMatchSegmenter, WhitespaceSegmenter
from .simindex import (Candidate, CandidateSet, GlyphDictionary, PixelIndex,
                       build_pixel_index, merge_candidates, pixel_candidates,
                       radical_candidates)

__version__ = "0.1.0"

__all__ = [
    "AttackConfig", "AttackContext", "AttackResult", "Replacement",
    "ReplacementPlan", "apply_perceptual_gate", "attack_corpus",
    "expand_solution_space", "plan_replacements", "run_attack",
    "verify_records", "run_conformance",
    "EvalReport", "evaluate", "tokenize_en",
    "GlyphBitmap", "RenderConfig", "render_char", "render_sentence",
    "BleuScore", "PerceptualScore", "bleu", "corpus_bleu", "cosine", "mse",
    "msssim", "perceptual_similarity", "sentence_perceptual", "ssim",
    "BackendEndpoint", "BackendSuite", "HttpBackend", "MockMaskedLM",
    "MockSentenceSim", "MockTranslator", "reverse_translations",
    "LongestMatchSegmenter", "WhitespaceSegmenter",
    "Candidate", "CandidateSet", "GlyphDictionary", "PixelIndex",
    "build_pixel_index", "merge_candidates", "pixel_candidates",
    "radical_candidates",
]
