"""Fuzzy template matching against independently coded exhaustive scans.

Three codings are cross-checked: the selected kernel lane (compiled when
built), the numpy fallback lane (template-pixel accumulation), and the
oracles here (a chunked row-window scan plus a tiny pure-python triple
loop). All must agree on position, scale and score because SSD is exact
integer arithmetic in every lane.
"""

import math
import random

import numpy as np
import pytest

from adwar.perceptual import _kernels_py, kernels
from adwar.perceptual.imagematch import (
    ImageTemplate,
    TemplateSizeError,
    match_image,
)
from adwar.perceptual.pixels import from_rgba_array, scale_nearest, to_gray
from adwar.snapshot import ImageBitmap


def _gray_bitmap(gray: np.ndarray) -> ImageBitmap:
    rgba = np.stack([gray] * 3 + [np.full_like(gray, 255)], axis=-1)
    return from_rgba_array(rgba.astype(np.uint8))


def _oracle_scan_windows(hay: np.ndarray, tmpl: np.ndarray) -> tuple[int, int, int]:
    """Oracle A: row-chunked window scan (different decomposition from both
    kernel lanes), exact integers."""
    hh, hw = hay.shape
    th, tw = tmpl.shape
    best = None
    t64 = tmpl.astype(np.int64)
    for y in range(hh - th + 1):
        block = hay[y : y + th, :].astype(np.int64)
        for x in range(hw - tw + 1):
            ssd = int(((block[:, x : x + tw] - t64) ** 2).sum())
            if best is None or ssd < best[2]:
                best = (y, x, ssd)
    return best


def _oracle_scan_pure(hay, tmpl) -> tuple[int, int, int]:
    """Oracle B: pure-python triple loop, no numpy at all."""
    hh, hw = len(hay), len(hay[0])
    th, tw = len(tmpl), len(tmpl[0])
    best = None
    for y in range(hh - th + 1):
        for x in range(hw - tw + 1):
            ssd = 0
            for ty in range(th):
                hrow = hay[y + ty]
                trow = tmpl[ty]
                for tx in range(tw):
                    d = hrow[x + tx] - trow[tx]
                    ssd += d * d
            if best is None or ssd < best[2]:
                best = (y, x, ssd)
    return best


def _oracle_match(bitmap: ImageBitmap, tmpl: ImageTemplate):
    """Full match_image semantics recoded on top of oracle A."""
    hay = to_gray(bitmap)
    best = None
    for si, scale in enumerate(tmpl.scale_set):
        scaled = scale_nearest(tmpl.gray, scale)
        if scaled.shape[0] > hay.shape[0] or scaled.shape[1] > hay.shape[1]:
            continue
        y, x, ssd = _oracle_scan_windows(hay, scaled)
        score = math.sqrt(ssd / scaled.size) / 255.0
        if best is None or score < best[0]:
            best = (score, si, y, x, scale)
    if best is None or best[0] > tmpl.max_normalized_rmse:
        return None
    return best


def test_exact_embed_scores_zero():
    rng = np.random.default_rng(0)
    hay = rng.integers(0, 256, size=(30, 40), dtype=np.uint8)
    tmpl_gray = rng.integers(0, 256, size=(5, 7), dtype=np.uint8)
    hay[3 : 3 + 5, 7 : 7 + 7] = tmpl_gray
    m = match_image(_gray_bitmap(hay), ImageTemplate(tmpl_gray, scale_set=(1.0,)))
    assert (m.x, m.y) == (7, 3)
    assert m.score == 0.0


def test_noisy_embed_within_analytic_bound():
    """Uniform +-10 noise means per-pixel gray error <= 10, so the RMSE at
    the embed position is at most 10/255 < 0.15."""
    rng = np.random.default_rng(1)
    hay = np.full((40, 60), 200, dtype=np.uint8)
    tmpl_gray = rng.integers(0, 256, size=(8, 12), dtype=np.uint8)
    noise = rng.integers(-10, 11, size=tmpl_gray.shape)
    noisy = np.clip(tmpl_gray.astype(int) + noise, 0, 255).astype(np.uint8)
    hay[20 : 20 + 8, 30 : 30 + 12] = noisy
    tmpl = ImageTemplate(tmpl_gray, scale_set=(1.0,), max_normalized_rmse=0.15)
    m = match_image(_gray_bitmap(hay), tmpl)
    assert (m.x, m.y) == (30, 20)
    assert m.score <= 10 / 255


def test_above_threshold_returns_no_match():
    hay = np.zeros((20, 20), dtype=np.uint8)
    tmpl = ImageTemplate(np.full((4, 4), 255, dtype=np.uint8), scale_set=(1.0,),
                         max_normalized_rmse=0.15)
    assert match_image(_gray_bitmap(hay), tmpl) is None


def test_template_larger_than_haystack_errors():
    hay = np.zeros((4, 4), dtype=np.uint8)
    tmpl = ImageTemplate(np.zeros((10, 10), dtype=np.uint8), scale_set=(1.0, 2.0))
    with pytest.raises(TemplateSizeError):
        match_image(_gray_bitmap(hay), tmpl)


def test_scale_search_finds_resized_embed():
    rng = np.random.default_rng(2)
    tmpl_gray = rng.integers(0, 256, size=(8, 8), dtype=np.uint8)
    scaled = scale_nearest(tmpl_gray, 0.5)
    hay = np.full((30, 30), 128, dtype=np.uint8)
    hay[10 : 10 + scaled.shape[0], 12 : 12 + scaled.shape[1]] = scaled
    tmpl = ImageTemplate(tmpl_gray, scale_set=(0.5, 1.0), max_normalized_rmse=0.05)
    m = match_image(_gray_bitmap(hay), tmpl)
    assert (m.x, m.y, m.scale) == (12, 10, 0.5)
    assert m.score == 0.0


def test_tie_break_prefers_row_major_first():
    hay = np.zeros((10, 10), dtype=np.uint8)  # all-equal: every position ties
    tmpl = ImageTemplate(np.zeros((2, 2), dtype=np.uint8), scale_set=(1.0,))
    m = match_image(_gray_bitmap(hay), tmpl)
    assert (m.x, m.y) == (0, 0)


def test_kernel_lanes_agree_exactly():
    rng = np.random.default_rng(3)
    for _ in range(50):
        hh, hw = rng.integers(6, 40, size=2)
        th = int(rng.integers(1, hh + 1))
        tw = int(rng.integers(1, hw + 1))
        hay = rng.integers(0, 256, size=(hh, hw), dtype=np.uint8)
        tmpl = rng.integers(0, 256, size=(th, tw), dtype=np.uint8)
        assert kernels.best_ssd_match(hay, tmpl) == _kernels_py.best_ssd_match(hay, tmpl)


def test_match_equals_pure_python_scan_small():
    rng = np.random.default_rng(4)
    for _ in range(10):
        hay = rng.integers(0, 256, size=(16, 16), dtype=np.uint8)
        tmpl = rng.integers(0, 256, size=(4, 4), dtype=np.uint8)
        got = kernels.best_ssd_match(hay, tmpl)
        want = _oracle_scan_pure(hay.astype(int).tolist(), tmpl.astype(int).tolist())
        assert got == tuple(want)


def test_match_image_equals_oracle_on_random_haystacks():
    rng = np.random.default_rng(5)
    pyrng = random.Random(5)
    for _ in range(60):
        hh = pyrng.randint(12, 64)
        hw = pyrng.randint(12, 64)
        hay = rng.integers(0, 256, size=(hh, hw), dtype=np.uint8)
        tmpl_gray = rng.integers(0, 256, size=(pyrng.randint(2, 8), pyrng.randint(2, 8)),
                                 dtype=np.uint8)
        tmpl = ImageTemplate(tmpl_gray, scale_set=(0.5, 1.0), max_normalized_rmse=1.0)
        got = match_image(_gray_bitmap(hay), tmpl)
        want = _oracle_match(_gray_bitmap(hay), tmpl)
        assert got is not None and want is not None
        score, _, y, x, scale = want
        assert (got.x, got.y, got.scale) == (x, y, scale)
        assert abs(got.score - score) <= 1e-9


def test_scale_nearest_definition():
    """Independent recoding of the documented resampling rule."""
    rng = np.random.default_rng(6)
    gray = rng.integers(0, 256, size=(7, 9), dtype=np.uint8)
    for scale in (0.5, 0.75, 1.0, 1.25, 2.0):
        got = scale_nearest(gray, scale)
        out_h = max(1, round(7 * scale))
        out_w = max(1, round(9 * scale))
        assert got.shape == (out_h, out_w)
        for i in range(out_h):
            for j in range(out_w):
                assert got[i, j] == gray[(i * 7) // out_h, (j * 9) // out_w]
