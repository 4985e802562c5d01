# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contracts and operation order as ``_pykernels``.

Work is split over output lines only, so results do not depend on the
thread count.
"""

import numpy as np
from cython.parallel import prange

NAME = "cython"


def chord_sums(const double[:, :, ::1] P, const unsigned char[:, ::1] nz,
               const long long[:, ::1] offsets, const long long[::1] widths, int nthreads=1):
    cdef Py_ssize_t A0 = P.shape[0], A1 = P.shape[1], X = P.shape[2] - 1
    cdef Py_ssize_t K = widths.shape[0]
    out_arr = np.zeros((A0, A1, X))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t t, i, j, k, si, sj, x, w, hi, lo
    if nthreads < 1:
        nthreads = 1
    for t in prange(A0 * A1, nogil=True, schedule="static", num_threads=nthreads):
        i = t // A1
        j = t - i * A1
        for k in range(K):
            si = i + offsets[k, 0]
            sj = j + offsets[k, 1]
            if si < 0 or si >= A0 or sj < 0 or sj >= A1:
                continue
            if not nz[si, sj]:
                continue
            w = widths[k]
            for x in range(X):
                hi = x + w + 1
                if hi > X:
                    hi = X
                lo = x - w
                if lo < 0:
                    lo = 0
                out[i, j, x] = out[i, j, x] + (P[si, sj, hi] - P[si, sj, lo])
    return out_arr


def box_max(const double[:, :, ::1] S, widths, factors, region, int nthreads=1):
    cdef Py_ssize_t A0 = S.shape[0] - 1, A1 = S.shape[1] - 1, A2 = S.shape[2] - 1
    cdef const long long[::1] w0 = np.ascontiguousarray(widths[0], dtype=np.int64)
    cdef const long long[::1] w1 = np.ascontiguousarray(widths[1], dtype=np.int64)
    cdef const long long[::1] w2 = np.ascontiguousarray(widths[2], dtype=np.int64)
    cdef const double[::1] f0 = np.ascontiguousarray(factors[0], dtype=np.float64)
    cdef const double[::1] f1 = np.ascontiguousarray(factors[1], dtype=np.float64)
    cdef const double[::1] f2 = np.ascontiguousarray(factors[2], dtype=np.float64)
    cdef Py_ssize_t z0 = region[0], z1 = region[1], y0 = region[2], y1 = region[3]
    cdef Py_ssize_t x0 = region[4], x1 = region[5]
    out_arr = np.zeros((A0, A1, A2))
    cdef double[:, :, ::1] out = out_arr
    if z1 <= z0 or y1 <= y0 or x1 <= x0:
        return out_arr
    cdef Py_ssize_t ny = y1 - y0, t, z, y, x, i, j, l
    cdef Py_ssize_t za, zb, ya, yb, xa, xb
    cdef double best, box, val
    if nthreads < 1:
        nthreads = 1
    for t in prange((z1 - z0) * ny, nogil=True, schedule="static", num_threads=nthreads):
        z = z0 + t // ny
        y = y0 + t % ny
        for x in range(x0, x1):
            best = -1e308 * 10.0
            for i in range(w0.shape[0]):
                za = z - w0[i]
                if za < 0:
                    za = 0
                zb = z + w0[i] + 1
                if zb > A0:
                    zb = A0
                for j in range(w1.shape[0]):
                    ya = y - w1[j]
                    if ya < 0:
                        ya = 0
                    yb = y + w1[j] + 1
                    if yb > A1:
                        yb = A1
                    for l in range(w2.shape[0]):
                        xa = x - w2[l]
                        if xa < 0:
                            xa = 0
                        xb = x + w2[l] + 1
                        if xb > A2:
                            xb = A2
                        box = (S[zb, yb, xb] - S[za, yb, xb] - S[zb, ya, xb] - S[zb, yb, xa]
                               + S[za, ya, xb] + S[za, yb, xa] + S[zb, ya, xa] - S[za, ya, xa])
                        val = box / (f0[i] * f1[j] * f2[l])
                        if val > best:
                            best = val
            out[z, y, x] = best
    return out_arr
