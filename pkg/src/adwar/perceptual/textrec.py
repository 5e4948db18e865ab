"""Disclosure-text recognition for text rendered as images.

The recognizer interface is pluggable so a real OCR engine can be swapped
in; the reference implementation rasterizes each lexicon word in the
bundled 5x7 bitmap font and template-matches it against the region. Its
reported "edit distance" is substitution-only: the number of glyph cells
at the best whole-word alignment whose normalized RMSE exceeds the cell
threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..snapshot import ImageBitmap
from . import kernels
from .pixels import to_gray

__all__ = [
    "BitmapFont",
    "LexiconEntry",
    "MarkerLexicon",
    "TextHit",
    "TextRecognizer",
    "GlyphTemplateRecognizer",
    "recognize_text",
    "render_word",
    "DEFAULT_MARKER_WORDS",
]

# Disclosure strings the ecosystem actually uses.
DEFAULT_MARKER_WORDS = (("Sponsored", 1), ("AdChoices", 1), ("Close Ad", 1), ("Ad", 0))


class BitmapFont:
    """Fixed-cell bitmap font: each glyph is cell_height rows of
    cell_width '#'/'.' pixels, advanced by `advance` columns."""

    def __init__(self, cell_width: int, cell_height: int, advance: int,
                 glyphs: dict[str, list[str]]):
        self.cell_width = cell_width
        self.cell_height = cell_height
        self.advance = advance
        self.glyphs: dict[str, np.ndarray] = {}
        for ch, rows in glyphs.items():
            if len(rows) != cell_height or any(len(r) != cell_width for r in rows):
                raise ValueError(f"glyph {ch!r} has wrong cell shape")
            self.glyphs[ch] = np.array(
                [[c == "#" for c in row] for row in rows], dtype=bool
            )

    @classmethod
    def load(cls, path) -> "BitmapFont":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(doc["cell_width"], doc["cell_height"], doc["advance"], doc["glyphs"])

    def has_glyphs(self, word: str) -> bool:
        return all(ch in self.glyphs for ch in word)


def render_word(
    font: BitmapFont,
    word: str,
    scale: int = 1,
    fg: int = 0,
    bg: int = 255,
) -> np.ndarray:
    """Rasterize a word as a grayscale matrix (integer pixel-replication
    scaling). Unknown characters raise KeyError."""
    if not word:
        raise ValueError("empty word")
    if scale < 1:
        raise ValueError("scale must be >= 1")
    h = font.cell_height
    w = len(word) * font.advance - (font.advance - font.cell_width)
    out = np.full((h, w), bg, dtype=np.uint8)
    for i, ch in enumerate(word):
        mask = font.glyphs[ch]
        x0 = i * font.advance
        cell = out[:, x0 : x0 + font.cell_width]
        cell[mask] = fg
    if scale > 1:
        out = np.repeat(np.repeat(out, scale, axis=0), scale, axis=1)
    return out


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    max_distance: int

    def __post_init__(self):
        if not (0 <= self.max_distance < len(self.word)):
            raise ValueError(
                f"edit-distance bound {self.max_distance} must be < len({self.word!r})"
            )


@dataclass(frozen=True)
class MarkerLexicon:
    entries: tuple[LexiconEntry, ...]

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "MarkerLexicon":
        return cls(tuple(LexiconEntry(w, d) for w, d in pairs))

    @classmethod
    def default(cls) -> "MarkerLexicon":
        return cls.of(*DEFAULT_MARKER_WORDS)

    def words(self) -> tuple[str, ...]:
        return tuple(e.word for e in self.entries)


@dataclass(frozen=True)
class TextHit:
    word: str
    x: int
    y: int
    distance: int
    scale: int
    score: float  # whole-word normalized RMSE at the reported position


class TextRecognizer(Protocol):
    def recognize(self, region: ImageBitmap, lexicon: MarkerLexicon) -> list[TextHit]:
        ...


class GlyphTemplateRecognizer:
    """Reference recognizer: whole-word template match, then per-glyph-cell
    scoring at the best alignment.

    A word is reported when the number of failing cells is within the
    lexicon entry's distance bound. cell_threshold is the per-cell
    normalized RMSE above which a cell counts as substituted.
    """

    def __init__(self, font: BitmapFont, scales: tuple[int, ...] = (1, 2),
                 cell_threshold: float = 0.18):
        self.font = font
        self.scales = scales
        self.cell_threshold = cell_threshold

    def _cell_distance(self, region_gray: np.ndarray, word_img: np.ndarray,
                       word: str, y: int, x: int, scale: int) -> int:
        cw = self.font.cell_width * scale
        ch = self.font.cell_height * scale
        adv = self.font.advance * scale
        window = region_gray[y : y + word_img.shape[0], x : x + word_img.shape[1]]
        mismatches = 0
        for i, _ in enumerate(word):
            x0 = i * adv
            cell_have = window[:, x0 : x0 + cw].astype(np.int64)
            cell_want = word_img[:, x0 : x0 + cw].astype(np.int64)
            ssd = int(((cell_have - cell_want) ** 2).sum())
            rmse = math.sqrt(ssd / (cw * ch)) / 255.0
            if rmse > self.cell_threshold:
                mismatches += 1
        return mismatches

    def recognize(self, region: ImageBitmap, lexicon: MarkerLexicon) -> list[TextHit]:
        region_gray = to_gray(region)
        hits: list[TextHit] = []
        for entry in lexicon.entries:
            if not self.font.has_glyphs(entry.word):
                continue
            best: tuple[int, float, int, int, int] | None = None
            for scale in self.scales:
                word_img = render_word(self.font, entry.word, scale)
                if (word_img.shape[0] > region_gray.shape[0]
                        or word_img.shape[1] > region_gray.shape[1]):
                    continue
                y, x, ssd = kernels.best_ssd_match(
                    region_gray, np.ascontiguousarray(word_img)
                )
                score = math.sqrt(ssd / word_img.size) / 255.0
                dist = self._cell_distance(region_gray, word_img, entry.word, y, x, scale)
                if dist <= entry.max_distance:
                    cand = (dist, score, scale, y, x)
                    if best is None or cand[:2] < best[:2]:
                        best = cand
            if best is not None:
                dist, score, scale, y, x = best
                hits.append(TextHit(entry.word, x=x, y=y, distance=dist,
                                    scale=scale, score=score))
        return hits


def recognize_text(
    region: ImageBitmap,
    lexicon: MarkerLexicon,
    recognizer: TextRecognizer | None = None,
) -> list[TextHit]:
    """Find lexicon words rendered inside an image region.

    Uses the bundled reference recognizer unless another implementation is
    plugged in.
    """
    if region.width == 0 or region.height == 0:
        raise ValueError("empty region")
    if recognizer is None:
        from ..assets import default_recognizer

        recognizer = default_recognizer()
    return recognizer.recognize(region, lexicon)
