"""Pixel-level helpers shared by the perceptual operations and the corpus
generator: grayscale conversion, nearest-neighbor scaling, PNG IO and
simple RGBA compositing."""

from __future__ import annotations

import numpy as np

from ..snapshot import ImageBitmap

__all__ = [
    "to_rgba_array",
    "from_rgba_array",
    "to_gray",
    "scale_nearest",
    "load_png",
    "save_png",
    "paste",
    "solid_bitmap",
]


def to_rgba_array(bitmap: ImageBitmap) -> np.ndarray:
    """(h, w, 4) uint8 view of the bitmap's pixels."""
    arr = np.frombuffer(bitmap.pixels, dtype=np.uint8)
    return arr.reshape(bitmap.height, bitmap.width, 4)


def from_rgba_array(arr: np.ndarray) -> ImageBitmap:
    if arr.dtype != np.uint8 or arr.ndim != 3 or arr.shape[2] != 4:
        raise ValueError("expected (h, w, 4) uint8 array")
    h, w = arr.shape[:2]
    return ImageBitmap(width=w, height=h, pixels=arr.tobytes())


def to_gray(bitmap: ImageBitmap) -> np.ndarray:
    """Rec.601 luma, rounded to uint8: 0.299 R + 0.587 G + 0.114 B.

    Alpha is ignored (snapshot pixels are post-composite).
    """
    rgba = to_rgba_array(bitmap).astype(np.float64)
    luma = 0.299 * rgba[:, :, 0] + 0.587 * rgba[:, :, 1] + 0.114 * rgba[:, :, 2]
    return np.floor(luma + 0.5).astype(np.uint8)


def scale_nearest(gray: np.ndarray, scale: float) -> np.ndarray:
    """Nearest-neighbor resample of a grayscale matrix.

    Output dims are max(1, round(dim * scale)); source index for output i
    is floor(i * in_dim / out_dim). Deterministic and trivially re-codable,
    which is what the brute-force oracles rely on.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    in_h, in_w = gray.shape
    out_h = max(1, int(round(in_h * scale)))
    out_w = max(1, int(round(in_w * scale)))
    rows = (np.arange(out_h) * in_h) // out_h
    cols = (np.arange(out_w) * in_w) // out_w
    return gray[np.ix_(rows, cols)]


def load_png(path) -> ImageBitmap:
    from PIL import Image

    with Image.open(path) as im:
        rgba = im.convert("RGBA")
        arr = np.asarray(rgba, dtype=np.uint8)
    return from_rgba_array(arr)


def save_png(bitmap: ImageBitmap, path) -> None:
    from PIL import Image

    Image.fromarray(to_rgba_array(bitmap), mode="RGBA").save(path)


def solid_bitmap(width: int, height: int, rgba: tuple[int, int, int, int]) -> ImageBitmap:
    arr = np.empty((height, width, 4), dtype=np.uint8)
    arr[:, :] = rgba
    return from_rgba_array(arr)


def paste(dest: ImageBitmap, src: ImageBitmap, x: int, y: int) -> ImageBitmap:
    """Opaque rectangle paste (no alpha blending); src must fit."""
    if x < 0 or y < 0 or x + src.width > dest.width or y + src.height > dest.height:
        raise ValueError("paste region out of bounds")
    out = to_rgba_array(dest).copy()
    out[y : y + src.height, x : x + src.width] = to_rgba_array(src)
    return from_rgba_array(out)
