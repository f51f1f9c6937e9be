"""Text-to-bitmap rasterization.

Characters are drawn into fixed-size monospaced cells and sentences are the
horizontal concatenation of per-character cells.  The cell discipline gives
an unambiguous char -> pixel-region mapping, so changing character i of a
sentence changes exactly the pixel columns of cell i and nothing else.

Conventions baked into the geometry digest:
  * grayscale, intensities normalized to [0, 1]
  * background 0.0, ink 1.0, anti-aliased edges in between
  * default cell 24x24 px at font size 18 (the font size follows the usual
    rendering protocol for this kind of evaluation; the cell geometry is our
    own choice and is stamped into every persisted artifact)
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

import numpy as np
from fontTools.ttLib import TTFont
from PIL import Image, ImageDraw, ImageFont

from .errors import ConfigError, EmptyTextError, FontLoadError, NoGlyphError, TooLongError

DEFAULT_FONT = os.path.join(os.path.dirname(__file__), "data", "cjkstub.ttf")
DEJAVU_CANDIDATES = (
    "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
    os.path.join(os.path.dirname(__file__), "data", "DejaVuSans.ttf"),
)

_GEOMETRY_TAG = "glyphattack-geom/v1"


def _find_dejavu():
    for p in DEJAVU_CANDIDATES:
        if os.path.exists(p):
            return p
    return None


def default_font_chain():
    """Bundled stub font first, DejaVu Sans as fallback when present."""
    chain = [DEFAULT_FONT]
    dv = _find_dejavu()
    if dv:
        chain.append(dv)
    return tuple(chain)


@dataclass
class GlyphBitmap:
    """Normalized grayscale raster of one character or one sentence."""

    pixels: np.ndarray  # (height, width) float32 in [0, 1], row-major
    text: str

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    def flatten(self):
        return self.pixels.reshape(-1)

    def save_png(self, path):
        """Dump as 8-bit grayscale PNG for inspection."""
        arr = np.clip(np.rint(self.pixels * 255.0), 0, 255).astype(np.uint8)
        Image.fromarray(arr, mode="L").save(path)


class _FontEntry:
    __slots__ = ("path", "pil", "codepoints", "content_sha")

    def __init__(self, path, size):
        if not os.path.exists(path):
            raise FontLoadError("font file not found: %s" % path)
        try:
            with open(path, "rb") as fh:
                data = fh.read()
            self.pil = ImageFont.truetype(path, size)
            tt = TTFont(path, fontNumber=0, lazy=True)
            self.codepoints = frozenset(tt.getBestCmap().keys())
            tt.close()
        except FontLoadError:
            raise
        except Exception as exc:  # font parsing failures from either library
            raise FontLoadError("cannot load font %s: %s" % (path, exc)) from exc
        self.path = path
        self.content_sha = hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class RenderConfig:
    """Rasterization settings.  Construct once, treat as immutable.

    Font loading happens eagerly in __post_init__ (serialized, one-time);
    rendering afterwards is pure and safe for concurrent callers.
    """

    font_paths: tuple = field(default_factory=default_font_chain)
    font_size: int = 18
    cell_width: int = 24
    cell_height: int = 24
    background: float = 0.0
    foreground: float = 1.0
    max_sentence_chars: int = 512

    def __post_init__(self):
        if self.font_size <= 0:
            raise ConfigError("font_size must be positive")
        if self.cell_width <= 0 or self.cell_height <= 0:
            raise ConfigError("cell dimensions must be positive")
        if not self.font_paths:
            raise ConfigError("at least one font path is required")
        if not (0.0 <= self.background <= 1.0 and 0.0 <= self.foreground <= 1.0):
            raise ConfigError("background/foreground intensities must lie in [0,1]")
        entries = tuple(_FontEntry(p, self.font_size) for p in self.font_paths)
        for e in entries:
            ascent, descent = e.pil.getmetrics()
            if ascent + descent > self.cell_height:
                raise ConfigError(
                    "font %s at size %d needs %d px of height; cell is only %d"
                    % (e.path, self.font_size, ascent + descent, self.cell_height))
        object.__setattr__(self, "_fonts", entries)
        object.__setattr__(self, "_cell_cache", {})

    # -- geometry stamp ----------------------------------------------------

    def digest(self):
        """Hex digest identifying the full render geometry.

        Includes the font file contents, so indexes built under one font
        stack can never be queried under another.
        """
        h = hashlib.sha256()
        h.update(_GEOMETRY_TAG.encode())
        for e in self._fonts:
            h.update(e.content_sha.encode())
        h.update(("|%d|%dx%d|%g|%g" % (self.font_size, self.cell_width,
                                       self.cell_height, self.background,
                                       self.foreground)).encode())
        return h.hexdigest()

    def snapshot(self):
        """JSON-serializable view, recorded in results and manifests."""
        return {
            "font_paths": list(self.font_paths),
            "font_size": self.font_size,
            "cell_width": self.cell_width,
            "cell_height": self.cell_height,
            "background": self.background,
            "foreground": self.foreground,
            "max_sentence_chars": self.max_sentence_chars,
            "geometry_digest": self.digest(),
        }

    @classmethod
    def from_snapshot(cls, snap):
        cfg = cls(font_paths=tuple(snap["font_paths"]),
                  font_size=snap["font_size"],
                  cell_width=snap["cell_width"],
                  cell_height=snap["cell_height"],
                  background=snap["background"],
                  foreground=snap["foreground"],
                  max_sentence_chars=snap.get("max_sentence_chars", 512))
        want = snap.get("geometry_digest")
        if want and cfg.digest() != want:
            raise ConfigError("render config snapshot digest mismatch "
                              "(font files changed since the snapshot was taken?)")
        return cfg

    # -- rendering ---------------------------------------------------------

    def can_render(self, char):
        cp = ord(char)
        return any(cp in e.codepoints for e in self._fonts)

    def _font_for(self, char):
        cp = ord(char)
        for e in self._fonts:
            if cp in e.codepoints:
                return e.pil
        raise NoGlyphError(char)

    def _render_cell(self, char):
        cached = self._cell_cache.get(char)
        if cached is not None:
            return cached
        font = self._font_for(char)
        bg = int(round(self.background * 255))
        img = Image.new("L", (self.cell_width, self.cell_height), bg)
        draw = ImageDraw.Draw(img)
        draw.text((self.cell_width / 2, self.cell_height / 2), char,
                  font=font, fill=int(round(self.foreground * 255)), anchor="mm")
        arr = np.asarray(img, dtype=np.float32) / np.float32(255.0)
        arr.flags.writeable = False
        self._cell_cache[char] = arr
        return arr


def render_char(char, cfg):
    """Rasterize a single codepoint into its cell.

    A codepoint unsupported by every configured font raises NoGlyphError;
    it is never silently drawn as a replacement box.
    """
    if len(char) != 1:
        raise ValueError("render_char takes exactly one codepoint, got %r" % char)
    return GlyphBitmap(pixels=cfg._render_cell(char), text=char)


def render_sentence(text, cfg):
    """Rasterize a sentence as one row of per-character cells.

    Output width is len(text) * cell_width; cell i holds exactly
    character i, so single-character edits stay local to their cell.
    """
    if not text:
        raise EmptyTextError("cannot render an empty sentence")
    if len(text) > cfg.max_sentence_chars:
        raise TooLongError("sentence has %d chars, configured maximum is %d"
                           % (len(text), cfg.max_sentence_chars))
    cells = [cfg._render_cell(c) for c in text]
    return GlyphBitmap(pixels=np.hstack(cells), text=text)
