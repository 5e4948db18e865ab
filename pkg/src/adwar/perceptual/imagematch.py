"""Fuzzy image template search.

Disclosure icons vary slightly between serving systems (sampling noise,
recompression, background shifts), so exact comparison is useless. The
matcher does an exhaustive sliding-window scan over every position and
every configured scale of the grayscale-converted haystack and keeps the
placement minimizing normalized RMSE; a match is reported only when that
minimum clears the template's threshold.

Score definition (shared with the test oracles): SSD is the exact integer
sum of squared grayscale differences; score = sqrt(SSD / n_pixels) / 255,
so 0.0 is a pixel-exact embed and 1.0 is maximal disagreement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..snapshot import ImageBitmap
from . import kernels
from .pixels import scale_nearest, to_gray

__all__ = [
    "TemplateSizeError",
    "ImageTemplate",
    "TemplateMatch",
    "match_image",
    "DEFAULT_SCALE_SET",
    "DEFAULT_THRESHOLD",
]

DEFAULT_SCALE_SET = (0.5, 0.75, 1.0, 1.25)
DEFAULT_THRESHOLD = 0.15


class TemplateSizeError(ValueError):
    """Template does not fit inside the haystack at any configured scale."""


@dataclass(frozen=True)
class ImageTemplate:
    """Grayscale template plus its search configuration."""

    gray: np.ndarray  # (h, w) uint8, row-major
    scale_set: tuple[float, ...] = DEFAULT_SCALE_SET
    max_normalized_rmse: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if not 0.0 <= self.max_normalized_rmse <= 1.0:
            raise ValueError("threshold must be in [0, 1]")
        if not self.scale_set or any(s <= 0 for s in self.scale_set):
            raise ValueError("scales must be positive")
        if self.gray.dtype != np.uint8 or self.gray.ndim != 2:
            raise ValueError("template must be a 2-d uint8 matrix")

    @classmethod
    def from_bitmap(
        cls,
        bitmap: ImageBitmap,
        scale_set: tuple[float, ...] = DEFAULT_SCALE_SET,
        max_normalized_rmse: float = DEFAULT_THRESHOLD,
    ) -> "ImageTemplate":
        return cls(to_gray(bitmap), scale_set, max_normalized_rmse)

    @classmethod
    def from_png(cls, path, **kwargs) -> "ImageTemplate":
        from .pixels import load_png

        return cls.from_bitmap(load_png(path), **kwargs)


@dataclass(frozen=True)
class TemplateMatch:
    x: int
    y: int
    scale: float
    score: float  # normalized RMSE, <= template threshold


def match_image(haystack: ImageBitmap, tmpl: ImageTemplate) -> TemplateMatch | None:
    """Best placement over all positions x scales, or None above threshold.

    Ties resolve deterministically: earlier scale in scale_set order, then
    smaller y, then smaller x. Raises TemplateSizeError when the template
    fits at no scale.
    """
    hay_gray = to_gray(haystack)
    best: tuple[float, int, int, int, float] | None = None  # score, si, y, x, scale
    fitted_any = False
    for si, scale in enumerate(tmpl.scale_set):
        scaled = scale_nearest(tmpl.gray, scale)
        th, tw = scaled.shape
        if th > hay_gray.shape[0] or tw > hay_gray.shape[1]:
            continue
        fitted_any = True
        y, x, ssd = kernels.best_ssd_match(hay_gray, np.ascontiguousarray(scaled))
        score = math.sqrt(ssd / (th * tw)) / 255.0
        if best is None or score < best[0]:
            best = (score, si, y, x, scale)
    if not fitted_any:
        raise TemplateSizeError(
            f"template {tmpl.gray.shape} larger than haystack "
            f"{hay_gray.shape} at every scale {tmpl.scale_set}"
        )
    assert best is not None
    score, _, y, x, scale = best
    if score <= tmpl.max_normalized_rmse:
        return TemplateMatch(x=x, y=y, scale=scale, score=score)
    return None
