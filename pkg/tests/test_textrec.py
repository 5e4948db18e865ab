"""Reference glyph recognizer over self-rendered fixtures."""

import numpy as np
import pytest

from adwar.assets import bundled_font, default_recognizer
from adwar.perceptual.pixels import from_rgba_array
from adwar.perceptual.textrec import (
    GlyphTemplateRecognizer,
    LexiconEntry,
    MarkerLexicon,
    recognize_text,
    render_word,
)


def _bitmap_with_word(word: str, x=10, y=6, size=(120, 24), scale=1):
    gray = np.full(size[::-1], 255, dtype=np.uint8)
    img = render_word(bundled_font(), word, scale=scale)
    gray[y : y + img.shape[0], x : x + img.shape[1]] = img
    rgba = np.stack([gray] * 3 + [np.full_like(gray, 255)], axis=-1)
    return from_rgba_array(rgba)


LEX = MarkerLexicon.of(("Sponsored", 1))


def test_self_rendered_word_found_at_zero_distance():
    region = _bitmap_with_word("Sponsored")
    [hit] = recognize_text(region, LEX)
    assert hit.word == "Sponsored"
    assert (hit.x, hit.y) == (10, 6)
    assert hit.distance == 0
    assert hit.score == 0.0


def test_blank_region_yields_nothing():
    blank = _bitmap_with_word(" ", x=0, y=0)
    assert recognize_text(blank, LEX) == []


def test_single_substitution_reported_within_bound():
    # 'Sp0nsored' rendered, lexicon word 'Sponsored' with distance bound 1
    region = _bitmap_with_word("Sp0nsored")
    [hit] = recognize_text(region, LEX)
    assert hit.word == "Sponsored"
    assert hit.distance == 1
    assert (hit.x, hit.y) == (10, 6)


def test_two_substitutions_exceed_bound():
    region = _bitmap_with_word("Sp0ns0red")
    assert recognize_text(region, LEX) == []


def test_scaled_rendering_recognized():
    region = _bitmap_with_word("Sponsored", size=(160, 30), scale=2)
    [hit] = recognize_text(region, LEX)
    assert hit.scale == 2
    assert hit.distance == 0


def test_multi_word_phrase():
    lex = MarkerLexicon.of(("Close Ad", 1))
    region = _bitmap_with_word("Close Ad")
    [hit] = recognize_text(region, lex)
    assert hit.word == "Close Ad"
    assert hit.distance == 0


def test_distance_bound_must_be_below_length():
    with pytest.raises(ValueError):
        LexiconEntry("Ad", 2)
    with pytest.raises(ValueError):
        LexiconEntry("Ad", -1)


def test_empty_region_rejected():
    from adwar.snapshot import ImageBitmap

    with pytest.raises(ValueError):
        recognize_text(ImageBitmap(0, 0, b""), LEX)


def test_glyph_scan_oracle():
    """The recognizer's (position, distance) equals an independent scan
    that evaluates the per-cell rule at every placement."""
    import math

    from adwar.perceptual.pixels import to_gray

    font = bundled_font()
    rec = default_recognizer()
    region = _bitmap_with_word("Sp0nsored", size=(90, 22))
    gray = to_gray(region)
    word = "Sponsored"
    img = render_word(font, word, scale=1)
    th, tw = img.shape

    best = None  # (mismatches, score, y, x)
    for y in range(gray.shape[0] - th + 1):
        for x in range(gray.shape[1] - tw + 1):
            window = gray[y : y + th, x : x + tw].astype(np.int64)
            ssd = int(((window - img.astype(np.int64)) ** 2).sum())
            score = math.sqrt(ssd / img.size) / 255.0
            mism = 0
            for i in range(len(word)):
                x0 = i * font.advance
                cell_have = window[:, x0 : x0 + font.cell_width]
                cell_want = img[:, x0 : x0 + font.cell_width].astype(np.int64)
                cssd = int(((cell_have - cell_want) ** 2).sum())
                crmse = math.sqrt(cssd / (font.cell_width * font.cell_height)) / 255.0
                if crmse > rec.cell_threshold:
                    mism += 1
            cand = (mism, score, y, x)
            if best is None or cand[:2] < best[:2]:
                best = cand

    hits = rec.recognize(region, MarkerLexicon.of((word, 1)))
    # the recognizer anchors at the best whole-word SSD position; the
    # oracle confirms that position carries the minimum substitution count
    assert hits and hits[0].distance == best[0]
    assert (hits[0].y, hits[0].x) == (best[2], best[3])


def test_pluggable_recognizer_interface():
    class Canned:
        def recognize(self, region, lexicon):
            from adwar.perceptual.textrec import TextHit

            return [TextHit(lexicon.entries[0].word, 0, 0, 0, 1, 0.0)]

    region = _bitmap_with_word(" ")
    hits = recognize_text(region, LEX, recognizer=Canned())
    assert hits[0].word == "Sponsored"


def test_font_covers_ascii_alnum():
    font = bundled_font()
    for ch in "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789 ":
        assert ch in font.glyphs
