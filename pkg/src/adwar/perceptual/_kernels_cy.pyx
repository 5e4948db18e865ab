# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled template-scan kernel: exact integer SSD over every placement.

Contract mirrors adwar.perceptual._kernels_py.best_ssd_match; the pure
lane is the reference, this one is just fast.
"""

import numpy as np

cimport numpy as cnp

LANE = "compiled"


def best_ssd_match(cnp.ndarray[cnp.uint8_t, ndim=2] hay,
                   cnp.ndarray[cnp.uint8_t, ndim=2] tmpl):
    cdef Py_ssize_t hh = hay.shape[0]
    cdef Py_ssize_t hw = hay.shape[1]
    cdef Py_ssize_t th = tmpl.shape[0]
    cdef Py_ssize_t tw = tmpl.shape[1]
    if th > hh or tw > hw or th == 0 or tw == 0:
        raise ValueError(
            f"template {th}x{tw} does not fit in haystack {hh}x{hw}")

    cdef const cnp.uint8_t[:, :] h = hay
    cdef const cnp.uint8_t[:, :] t = tmpl
    cdef Py_ssize_t out_h = hh - th + 1
    cdef Py_ssize_t out_w = hw - tw + 1
    cdef Py_ssize_t y, x, ty, tx
    cdef long long ssd, best_ssd, d
    cdef Py_ssize_t best_y = 0, best_x = 0
    best_ssd = -1
    with nogil:
        for y in range(out_h):
            for x in range(out_w):
                ssd = 0
                for ty in range(th):
                    for tx in range(tw):
                        d = <long long> h[y + ty, x + tx] - <long long> t[ty, tx]
                        ssd += d * d
                    # abandon a placement once it already lost (checked per
                    # row so the inner loop stays branch-free)
                    if best_ssd >= 0 and ssd > best_ssd:
                        break
                if best_ssd < 0 or ssd < best_ssd:
                    best_ssd = ssd
                    best_y = y
                    best_x = x
    return best_y, best_x, int(best_ssd)
