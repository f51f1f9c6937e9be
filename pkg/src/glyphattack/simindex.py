"""Visually-similar-character search.

Two complementary candidate sources per origin character:

  * radical search: characters sharing at least one radical/component with
    the origin, looked up in a decomposition table;
  * pixel search: characters whose rendered cell is close to the origin's,
    retrieved as cosine top-m over mean-centered pixel vectors and then
    re-ranked by ascending raw-pixel MSE, truncated to k.

The union of both sources is the final candidate set, with provenance tags.

Ties in either cosine or MSE are broken by ascending codepoint.  For that
rule to be implementation-independent, tied scores must compare exactly
equal, so the index scores cells in integer arithmetic: intensities are
8-bit quantized (the raster pipeline is 8-bit), per-pixel sums run in int64
(exact), and only the final division/sqrt happen in float64.  Mirror-image
glyphs whose distances to a query are equal in exact arithmetic therefore
get bit-identical scores no matter how the scan is coded.  Cosine is taken
over mean-centered vectors so all-background cells are not trivially alike.
The persisted index embeds the render-geometry digest and queries under a
different geometry are rejected.

Index file layout (little-endian):
    magic   7 bytes  b"VFAIDX1"
    digest  32 bytes render geometry sha256 (raw)
    n       uint32   repertoire length
    tlen    uint32   UTF-8 byte length of the char table
    table   tlen bytes, the repertoire chars concatenated
    dim     uint32   vector dimensionality (cell area)
    vectors n*dim float32
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (BadParamsError, GeometryMismatchError, IndexFormatError,
                     NoGlyphError, OriginMismatchError, ParseError,
                     ZeroVectorError)
from .glyph import render_char

MAGIC = b"VFAIDX1"


# --------------------------------------------------------------------------
# Radical decomposition table
# --------------------------------------------------------------------------

class GlyphDictionary:
    """char -> set-of-radicals mapping loaded from a decomposition file."""

    def __init__(self, radicals_by_char=None):
        self._radicals = {c: frozenset(r) for c, r in (radicals_by_char or {}).items()}
        self._chars_by_radical = {}
        for c, rads in self._radicals.items():
            for r in rads:
                self._chars_by_radical.setdefault(r, set()).add(c)

    def __len__(self):
        return len(self._radicals)

    def __contains__(self, char):
        return char in self._radicals

    def radicals(self, char):
        """Radical set of a character; absent characters map to the empty set."""
        return self._radicals.get(char, frozenset())

    def chars(self):
        return frozenset(self._radicals)

    def chars_with_radical(self, radical):
        return frozenset(self._chars_by_radical.get(radical, ()))

    @classmethod
    def load(cls, path):
        """Parse a UTF-8 TSV of `<char>\\t<radical>[,<radical>...]` records.

        `#` starts a comment line; duplicate character lines union their
        radical sets.  Malformed lines raise ParseError with line numbers.
        """
        table = {}
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ParseError(path, line_no, "expected <char>\\t<radicals>")
                char, radicals = parts[0], [r.strip() for r in parts[1].split(",")]
                if len(char) != 1:
                    raise ParseError(path, line_no, "key must be a single character, got %r" % char)
                radicals = [r for r in radicals if r]
                if not radicals:
                    raise ParseError(path, line_no, "character %r has no radicals" % char)
                table.setdefault(char, set()).update(radicals)
        return cls(table)


def radical_candidates(char, dictionary: GlyphDictionary):
    """Characters sharing at least one radical with `char`, `char` excluded."""
    out = set()
    for r in dictionary.radicals(char):
        out |= dictionary.chars_with_radical(r)
    out.discard(char)
    return out


# --------------------------------------------------------------------------
# Candidate sets
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Candidate:
    char: str
    source: str  # "rad" | "pix" | "both"
    cosine: float | None = None
    mse: float | None = None

    def to_dict(self):
        return {"char": self.char, "source": self.source,
                "cosine": self.cosine, "mse": self.mse}


@dataclass(frozen=True)
class CandidateSet:
    origin: str
    candidates: tuple

    def chars(self):
        return [c.char for c in self.candidates]

    def __len__(self):
        return len(self.candidates)

    @classmethod
    def empty(cls, origin):
        return cls(origin=origin, candidates=())


def merge_candidates(origin, rad, pix: CandidateSet) -> CandidateSet:
    """Union of radical and pixel candidates with provenance tags.

    Characters present in both sources are tagged "both" and keep their
    pixel scores; radical-only characters carry no scores and follow the
    pixel block in codepoint order.
    """
    if pix.origin != origin:
        raise OriginMismatchError("pixel candidates are for %r, not %r"
                                  % (pix.origin, origin))
    rad = set(rad) - {origin}
    merged = []
    pix_chars = set()
    for cand in pix.candidates:
        pix_chars.add(cand.char)
        if cand.char in rad:
            merged.append(Candidate(cand.char, "both", cand.cosine, cand.mse))
        else:
            merged.append(cand)
    for ch in sorted(rad - pix_chars):
        merged.append(Candidate(ch, "rad"))
    return CandidateSet(origin=origin, candidates=tuple(merged))


# --------------------------------------------------------------------------
# Pixel index
# --------------------------------------------------------------------------

def _center_unit(vectors):
    """Mean-center rows in float64 and L2-normalize; returns (unit, norms)."""
    v = vectors.astype(np.float64)
    v = v - v.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(v, axis=1)
    safe = np.where(norms < 1e-12, 1.0, norms)
    return v / safe[:, None], norms


def _quantized(vectors):
    """Recover the 8-bit integer grid behind the stored float intensities."""
    return np.rint(np.asarray(vectors, dtype=np.float64) * 255.0).astype(np.int64)


def _centered_ints(ints):
    """Scale-by-dim mean centering kept in exact integers.

    For a row v the centered vector is v - mean(v); multiplying through by
    dim gives dim*v - sum(v), which stays integral.  The common dim factor
    cancels in the cosine.  Returns (centered, squared_norms), both int64.
    """
    dim = ints.shape[-1]
    centered = ints * dim - ints.sum(axis=-1, keepdims=True)
    return centered, np.einsum("...i,...i->...", centered, centered)


class _CoarseQuantizer:
    """IVF-style coarse layout for accelerated search.

    Plain k-means over the centered unit vectors with a deterministic
    evenly-spaced seeding and a fixed iteration count, so the layout is a
    pure function of the index contents.
    """

    ITERATIONS = 8

    def __init__(self, unit_vectors, n_clusters):
        n = unit_vectors.shape[0]
        self.n_clusters = min(n_clusters, n)
        seed_idx = np.unique(np.linspace(0, n - 1, self.n_clusters).round().astype(int))
        centroids = unit_vectors[seed_idx].copy()
        for _ in range(self.ITERATIONS):
            sims = unit_vectors @ centroids.T
            assign = np.argmax(sims, axis=1)
            for ci in range(centroids.shape[0]):
                members = unit_vectors[assign == ci]
                if len(members):
                    c = members.mean(axis=0)
                    nrm = np.linalg.norm(c)
                    if nrm > 1e-12:
                        centroids[ci] = c / nrm
        self.centroids = centroids
        sims = unit_vectors @ centroids.T
        assign = np.argmax(sims, axis=1)
        self.members = [np.nonzero(assign == ci)[0] for ci in range(centroids.shape[0])]

    def probe(self, query_unit, nprobe):
        order = np.argsort(-(self.centroids @ query_unit))
        picked = order[:max(1, nprobe)]
        if len(picked) == 0:
            return np.arange(0)
        return np.concatenate([self.members[ci] for ci in picked])


@dataclass(eq=False)
class PixelIndex:
    """Immutable-after-build index of rendered character cells."""

    repertoire: tuple
    vectors: np.ndarray          # (n, dim) float32, raw intensities
    geometry_digest: str
    mode: str = "exact"          # "exact" | "accelerated"
    nprobe: int | None = None    # None = auto (quarter of the clusters)
    skipped: tuple = ()          # (char, reason) pairs from the build
    _unit: np.ndarray = field(default=None, repr=False, init=False, compare=False)
    _ints: np.ndarray = field(default=None, repr=False, init=False, compare=False)
    _cints: np.ndarray = field(default=None, repr=False, init=False, compare=False)
    _cnorm2: np.ndarray = field(default=None, repr=False, init=False, compare=False)
    _coarse: _CoarseQuantizer = field(default=None, repr=False, init=False, compare=False)
    _positions: dict = field(default=None, repr=False, init=False, compare=False)

    def __post_init__(self):
        if self.mode not in ("exact", "accelerated"):
            raise BadParamsError("mode must be 'exact' or 'accelerated'")
        self._unit, _ = _center_unit(self.vectors)  # float path, coarse layout only
        self._ints = _quantized(self.vectors)
        self._cints, self._cnorm2 = _centered_ints(self._ints)
        self._positions = {c: i for i, c in enumerate(self.repertoire)}
        self._coarse = None
        if self.mode == "accelerated":
            # build eagerly so the index is immutable once constructed and
            # safe for unlimited concurrent queries
            self._coarse_layout()

    def __len__(self):
        return len(self.repertoire)

    @property
    def dim(self):
        return self.vectors.shape[1]

    def _coarse_layout(self):
        if self._coarse is None:
            n_clusters = max(1, int(round(np.sqrt(len(self.repertoire)))))
            self._coarse = _CoarseQuantizer(self._unit, n_clusters)
        return self._coarse

    def _effective_nprobe(self):
        layout = self._coarse_layout()
        if self.nprobe is not None:
            return self.nprobe
        return max(2, int(np.ceil(layout.n_clusters * 0.25)))

    # -- persistence ---------------------------------------------------------

    def save(self, path):
        table = "".join(self.repertoire).encode("utf-8")
        vec = np.ascontiguousarray(self.vectors, dtype="<f4")
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(bytes.fromhex(self.geometry_digest))
            fh.write(struct.pack("<I", len(self.repertoire)))
            fh.write(struct.pack("<I", len(table)))
            fh.write(table)
            fh.write(struct.pack("<I", self.dim))
            fh.write(vec.tobytes())

    @classmethod
    def load(cls, path, mode="exact", nprobe=None):
        with open(path, "rb") as fh:
            blob = fh.read()
        if blob[:len(MAGIC)] != MAGIC:
            raise IndexFormatError("%s: bad magic, not a pixel index" % path)
        off = len(MAGIC)
        digest = blob[off:off + 32].hex()
        off += 32
        if len(blob) < off + 8:
            raise IndexFormatError("%s: truncated header" % path)
        n, tlen = struct.unpack_from("<II", blob, off)
        off += 8
        table = blob[off:off + tlen].decode("utf-8")
        off += tlen
        if len(table) != n:
            raise IndexFormatError("%s: char table has %d chars, header says %d"
                                   % (path, len(table), n))
        (dim,) = struct.unpack_from("<I", blob, off)
        off += 4
        want = n * dim * 4
        if len(blob) - off != want:
            raise IndexFormatError("%s: expected %d vector bytes, found %d"
                                   % (path, want, len(blob) - off))
        vectors = np.frombuffer(blob, dtype="<f4", count=n * dim, offset=off)
        vectors = vectors.reshape(n, dim).copy()
        return cls(repertoire=tuple(table), vectors=vectors,
                   geometry_digest=digest, mode=mode, nprobe=nprobe)


def build_pixel_index(repertoire, cfg, mode="exact", nprobe=None) -> PixelIndex:
    """Render a character repertoire and assemble the pixel index.

    Unrenderable characters (no glyph in any configured font) and blank
    renders (no usable cosine direction) go on the skip list instead of
    failing the whole build; duplicates keep their first occurrence.
    """
    seen = set()
    chars, rows, skipped = [], [], []
    for ch in repertoire:
        if ch in seen:
            continue
        seen.add(ch)
        if not cfg.can_render(ch):
            skipped.append((ch, "no-glyph"))
            continue
        arr = render_char(ch, cfg).flatten().astype(np.float32)
        if float(arr.max()) - float(arr.min()) < 1e-9:
            skipped.append((ch, "blank"))
            continue
        chars.append(ch)
        rows.append(arr)
    if len(chars) < 2:
        raise BadParamsError("need at least 2 renderable characters, got %d" % len(chars))
    return PixelIndex(repertoire=tuple(chars), vectors=np.vstack(rows),
                      geometry_digest=cfg.digest(), mode=mode, nprobe=nprobe,
                      skipped=tuple(skipped))


def pixel_candidates(char, index: PixelIndex, cfg, m, k) -> CandidateSet:
    """Cosine top-m then MSE top-k visually similar characters.

    The origin character never appears in its own candidate set.  Requires
    1 <= k <= m <= len(repertoire) - 1 and a geometry digest matching the
    querying RenderConfig.
    """
    if cfg.digest() != index.geometry_digest:
        raise GeometryMismatchError(
            "index was built under geometry %s..., query config is %s..."
            % (index.geometry_digest[:12], cfg.digest()[:12]))
    n = len(index.repertoire)
    if not (1 <= k <= m <= n - 1):
        raise BadParamsError("need 1 <= k <= m <= %d, got m=%d k=%d" % (n - 1, m, k))
    if not cfg.can_render(char):
        raise NoGlyphError(char)
    qints = _quantized(render_char(char, cfg).flatten())
    qc, qn2 = _centered_ints(qints)
    if qn2 == 0:
        raise ZeroVectorError("blank query glyph %r" % char)
    qnorm = np.sqrt(np.float64(qn2))

    if index.mode == "accelerated":
        qraw = qints.astype(np.float64)
        qcf = qraw - qraw.mean()
        qunit = qcf / np.linalg.norm(qcf)
        cand_idx = index._coarse_layout().probe(qunit, index._effective_nprobe())
    else:
        cand_idx = np.arange(n)

    origin_pos = index._positions.get(char)
    if origin_pos is not None:
        cand_idx = cand_idx[cand_idx != origin_pos]
    if len(cand_idx) == 0:
        return CandidateSet.empty(char)

    # exact integer dot products; only the normalization is floating point
    dots = index._cints[cand_idx] @ qc
    norms = np.sqrt(index._cnorm2[cand_idx].astype(np.float64))
    with np.errstate(divide="ignore", invalid="ignore"):
        sims = dots.astype(np.float64) / (norms * qnorm)
    sims = np.where(index._cnorm2[cand_idx] == 0, -np.inf, sims)
    order = sorted(range(len(cand_idx)),
                   key=lambda i: (-sims[i], index.repertoire[cand_idx[i]]))
    top = [(cand_idx[i], float(sims[i])) for i in order[:m]]

    dim = index.dim
    rescored = []
    for idx, cos_score in top:
        diff = index._ints[idx] - qints
        sse = int(np.einsum("i,i->", diff, diff))
        rescored.append((sse / (dim * 255.0 * 255.0), index.repertoire[idx], cos_score))
    rescored.sort(key=lambda t: (t[0], t[1]))
    cands = tuple(Candidate(char=ch, source="pix", cosine=cs, mse=ms)
                  for ms, ch, cs in rescored[:k])
    return CandidateSet(origin=char, candidates=cands)
