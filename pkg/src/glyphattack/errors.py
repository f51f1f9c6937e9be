"""Exception types shared across the package."""


class GlyphAttackError(Exception):
    """Base class for all package errors."""


class FontLoadError(GlyphAttackError):
    """A configured font file is missing or unreadable."""


class NoGlyphError(GlyphAttackError):
    """No font in the fallback chain has a glyph for the codepoint."""

    def __init__(self, char):
        self.char = char
        super().__init__("no glyph for U+%04X (%r) in any configured font" % (ord(char), char))


class ConfigError(GlyphAttackError):
    """Invalid render or attack configuration."""


class TooLongError(GlyphAttackError):
    """Sentence exceeds the configured maximum length."""


class EmptyTextError(GlyphAttackError):
    """Empty input where text is required."""


class DimMismatchError(GlyphAttackError):
    """Bitmaps have different dimensions."""


class TooSmallError(GlyphAttackError):
    """Bitmap smaller than the metric's window."""


class ZeroVectorError(GlyphAttackError):
    """Centered pixel vector is all zeros (blank glyph), cosine undefined."""


class LengthMismatchError(GlyphAttackError):
    """Sentence pair does not have equal character length."""


class EmptyReferenceError(GlyphAttackError):
    """BLEU called without a non-empty reference."""


class GeometryMismatchError(GlyphAttackError):
    """Index was built under a different render geometry than the query."""


class BadParamsError(GlyphAttackError):
    """Candidate search parameters out of range (need 1 <= k <= m <= n-1)."""


class OriginMismatchError(GlyphAttackError):
    """Candidate sets being merged were computed for different origin chars."""


class ParseError(GlyphAttackError):
    """Malformed record in a data file."""

    def __init__(self, path, line_no, message):
        self.path = path
        self.line_no = line_no
        super().__init__("%s:%d: %s" % (path, line_no, message))


class IndexFormatError(GlyphAttackError):
    """Persisted index file is corrupt or has the wrong magic/digest."""


class BackendError(GlyphAttackError):
    """Base class for model backend failures."""


class BackendUnavailableError(BackendError):
    """Backend could not be reached (transport failure or 5xx)."""


class MalformedResponseError(BackendError):
    """Backend answered but the payload violates the protocol schema."""
