"""Bundled asset access.

Assets ship inside the package (icon template, reference bitmap font,
tool-systematization dataset, default filter/signature files, detector
script corpus). The directory can be overridden with the ADWAR_ASSETS
environment variable; scripts/make_assets.py regenerates the binary ones.
"""

from __future__ import annotations

import functools
import json
import os
from pathlib import Path

from .perceptual.imagematch import ImageTemplate
from .perceptual.textrec import BitmapFont, GlyphTemplateRecognizer

__all__ = [
    "asset_dir",
    "asset_path",
    "adchoices_icon_template",
    "bundled_font",
    "default_recognizer",
    "load_table2",
    "default_filters_text",
    "default_signatures_text",
    "detector_corpus_dir",
]


def asset_dir() -> Path:
    override = os.environ.get("ADWAR_ASSETS")
    if override:
        return Path(override)
    return Path(__file__).parent / "assets"


def asset_path(name: str) -> Path:
    p = asset_dir() / name
    if not p.exists():
        raise FileNotFoundError(f"missing asset {name} (looked in {asset_dir()})")
    return p


@functools.lru_cache(maxsize=None)
def adchoices_icon_template(
    scale_set: tuple[float, ...] = (0.5, 0.75, 1.0, 1.25),
    max_normalized_rmse: float = 0.15,
) -> ImageTemplate:
    return ImageTemplate.from_png(
        asset_path("adchoices_icon.png"),
        scale_set=scale_set,
        max_normalized_rmse=max_normalized_rmse,
    )


@functools.lru_cache(maxsize=None)
def bundled_font() -> BitmapFont:
    return BitmapFont.load(asset_path("bitmap_font.json"))


@functools.lru_cache(maxsize=None)
def default_recognizer() -> GlyphTemplateRecognizer:
    return GlyphTemplateRecognizer(bundled_font())


@functools.lru_cache(maxsize=None)
def load_table2() -> list[dict]:
    with open(asset_path("table2.json"), encoding="utf-8") as fh:
        return json.load(fh)


def default_filters_text() -> str:
    return asset_path("filters_default.txt").read_text(encoding="utf-8")


def default_signatures_text() -> str:
    return asset_path("signatures_default.json").read_text(encoding="utf-8")


def detector_corpus_dir() -> Path:
    return asset_path("detector_corpus")
