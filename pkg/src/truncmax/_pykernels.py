"""Pure numpy implementations of the hot kernels.

Operation order matches ``_ckernels.pyx`` so both backends produce the same
bits; tests rely on that.
"""

import numpy as np

NAME = "numpy"


def chord_sums(P, nz, offsets, widths, nthreads=1):
    """Sum of line chords over a ball stencil.

    ``P`` holds per-line prefix sums with shape (A0, A1, X+1); ``nz`` flags
    lines that contain any nonzero value. For every stencil entry k the chord
    [x - w_k, x + w_k] of source line (i + o0_k, j + o1_k) is added to output
    line (i, j). Entries are visited in order, reads outside the array are 0.
    """
    A0, A1, X1 = P.shape
    X = X1 - 1
    out = np.zeros((A0, A1, X))
    lines = np.argwhere(nz)
    if lines.size == 0:
        return out
    PL = P[lines[:, 0], lines[:, 1]]
    xs = np.arange(X)
    last_w, chord = None, None
    for (o0, o1), w in zip(offsets, widths):
        if w != last_w:
            chord = PL[:, np.minimum(xs + w + 1, X)] - PL[:, np.maximum(xs - w, 0)]
            last_w = w
        t0 = lines[:, 0] - o0
        t1 = lines[:, 1] - o1
        ok = (t0 >= 0) & (t0 < A0) & (t1 >= 0) & (t1 < A1)
        if ok.all():
            out[t0, t1] += chord
        elif ok.any():
            out[t0[ok], t1[ok]] += chord[ok]
    return out


def _bounds(idx, w, size):
    return np.maximum(idx - w, 0), np.minimum(idx + w + 1, size)


def box_max(S, widths, factors, region, nthreads=1):
    """Max over half-width triples of box sum / (f0*f1*f2), from a padded summed-area table.

    ``S`` has shape (A0+1, A1+1, A2+1) with a zero leading plane on every
    axis. Cells outside ``region`` = (z0, z1, y0, y1, x0, x1) are left at 0.
    """
    shape = tuple(s - 1 for s in S.shape)
    out = np.zeros(shape)
    z0, z1, y0, y1, x0, x1 = region
    if z1 <= z0 or y1 <= y0 or x1 <= x0:
        return out
    axes = [np.arange(z0, z1), np.arange(y0, y1), np.arange(x0, x1)]
    best = np.full((z1 - z0, y1 - y0, x1 - x0), -np.inf)
    bz = [_bounds(axes[0], w, shape[0]) for w in widths[0]]
    by = [_bounds(axes[1], w, shape[1]) for w in widths[1]]
    bx = [_bounds(axes[2], w, shape[2]) for w in widths[2]]
    for i, (za, zb) in enumerate(bz):
        for j, (ya, yb) in enumerate(by):
            for l, (xa, xb) in enumerate(bx):
                box = (
                    S[np.ix_(zb, yb, xb)]
                    - S[np.ix_(za, yb, xb)]
                    - S[np.ix_(zb, ya, xb)]
                    - S[np.ix_(zb, yb, xa)]
                    + S[np.ix_(za, ya, xb)]
                    + S[np.ix_(za, yb, xa)]
                    + S[np.ix_(zb, ya, xa)]
                    - S[np.ix_(za, ya, xa)]
                )
                np.maximum(best, box / (factors[0][i] * factors[1][j] * factors[2][l]), out=best)
    out[z0:z1, y0:y1, x0:x1] = best
    return out
