"""Numpy fallback for the hot template-scan kernel.

Same contract as the compiled lane (adwar.perceptual._kernels_cy): exact
integer SSD over every placement, first minimum in row-major order. The
sum-of-squared-differences map is accumulated one template pixel at a time,
which keeps the arithmetic exact (int64) while staying vectorized.
"""

from __future__ import annotations

import numpy as np

LANE = "python"


def best_ssd_match(hay: np.ndarray, tmpl: np.ndarray) -> tuple[int, int, int]:
    """Minimum-SSD placement of tmpl inside hay.

    Both arrays are uint8 grayscale. Returns (y, x, ssd) where ssd is the
    exact integer sum of squared differences; ties resolve to the smallest
    y, then x. Raises ValueError if the template does not fit.
    """
    hh, hw = hay.shape
    th, tw = tmpl.shape
    if th > hh or tw > hw or th == 0 or tw == 0:
        raise ValueError(f"template {th}x{tw} does not fit in haystack {hh}x{hw}")
    out_h = hh - th + 1
    out_w = hw - tw + 1
    hay_i = hay.astype(np.int64)
    ssd = np.zeros((out_h, out_w), dtype=np.int64)
    for ty in range(th):
        row = hay_i[ty : ty + out_h, :]
        trow = tmpl[ty]
        for tx in range(tw):
            diff = row[:, tx : tx + out_w] - np.int64(trow[tx])
            ssd += diff * diff
    flat = int(np.argmin(ssd))  # row-major argmin = smallest (y, x) tie-break
    y, x = divmod(flat, out_w)
    return y, x, int(ssd[y, x])
