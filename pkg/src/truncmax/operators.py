"""Truncated maximal operators on grid functions.

Three kinds share one contract: at every cell centre x the output is the
largest average of f over the sampled family of sets centred at x, with the
analytic measure of the set in the denominator.

* ``scalar``  balls B(x, r), r sampled in [a, b]
* ``strong``  boxes prod [x_i - s_i, x_i + s_i], s_i sampled in [a_i, b_i]
* ``general`` products of balls over consecutive blocks of axes

Ball sums are accumulated as chords along one axis from prefix sums; box
sums come from a summed-area table. ``truncated_max_oracle`` recomputes the
same quantity by direct summation and is used to check both.
"""

from __future__ import annotations

import itertools
import math
import os
from contextlib import contextmanager

import numpy as np

from . import kernels
from .errors import BudgetError, ParameterError
from .geometry import ball_volume
from .grid import MEMBERSHIP_EPS, GridFunction
from .params import RadiiResolution, TruncationParams, resolve_radii

__all__ = [
    "RadiiResolution",
    "TruncationParams",
    "apply_operator",
    "ball_stencil",
    "general_truncated_max",
    "strong_truncated_max",
    "truncated_max",
    "truncated_max_oracle",
]

_threads = max(1, int(os.environ.get("TRUNCMAX_THREADS", "0") or 0) or (os.cpu_count() or 1))
_fault = 0.0


def set_num_threads(n: int) -> None:
    global _threads
    if n < 1:
        raise ParameterError(f"thread count must be positive, got {n}")
    _threads = int(n)


def get_num_threads() -> int:
    return _threads


@contextmanager
def inject_fault(delta: float = 1e-6):
    """Test hook: offset every output of the optimised kernels by ``delta``."""
    global _fault
    previous, _fault = _fault, float(delta)
    try:
        yield
    finally:
        _fault = previous


def _as3d(values: np.ndarray) -> np.ndarray:
    return values.reshape((1,) * (3 - values.ndim) + values.shape)


def _check(f: GridFunction, p: TruncationParams, kind: str | None) -> None:
    if kind is not None and p.kind != kind:
        raise ParameterError(f"expected {kind} truncation parameters, got {p.kind}")
    if p.n != f.spec.n:
        raise ParameterError(f"parameters are for n={p.n} but the grid has n={f.spec.n}")


def _chord_width(limit2: float, used: int) -> int:
    rem = limit2 - used
    w = int(math.isqrt(int(rem))) if rem >= 1 else 0
    while (w + 1) ** 2 <= rem:
        w += 1
    while w > 0 and w * w > rem:
        w -= 1
    return w


def ball_stencil(rho: float, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Chord decomposition of the closed ball of radius ``rho`` cells in Z^dim.

    Returns integer offsets over the first ``dim - 1`` axes (shape (K, dim-1))
    and the chord half-width along the last axis for each; sorted by
    (width, offsets).
    """
    limit2 = (rho + MEMBERSHIP_EPS) ** 2
    R = int(math.floor(rho + MEMBERSHIP_EPS))
    rows = []
    for v in itertools.product(range(-R, R + 1), repeat=dim - 1):
        used = sum(c * c for c in v)
        if used <= limit2:
            rows.append((_chord_width(limit2, used),) + v)
    rows.sort()
    arr = np.array(rows, dtype=np.int64).reshape(len(rows), dim)
    return np.ascontiguousarray(arr[:, 1:]), np.ascontiguousarray(arr[:, 0])


class _BallSummer:
    """Sums of g over closed balls spanning ``axes``, for any radius; prefix sums built once."""

    def __init__(self, g3: np.ndarray, axes: tuple[int, ...]):
        chord = axes[-1]
        others = [ax for ax in range(3) if ax != chord]
        self.perm = others + [chord]
        self.axes = axes
        self.slots = [others.index(ax) for ax in axes[:-1]]
        gp = np.ascontiguousarray(np.transpose(g3, self.perm))
        self.nz = np.ascontiguousarray((gp != 0).any(axis=2), dtype=np.uint8)
        self.prefix = kernels.line_prefix(gp)

    def __call__(self, rho: float) -> np.ndarray:
        offs, widths = ball_stencil(rho, len(self.axes))
        offsets = np.zeros((widths.size, 2), dtype=np.int64)
        for q, slot in enumerate(self.slots):
            offsets[:, slot] = offs[:, q]
        out = kernels.backend.chord_sums(self.prefix, self.nz, offsets, widths, _threads)
        return np.transpose(out, np.argsort(self.perm))


def _product_ball_max(f: GridFunction, p: TruncationParams, radii) -> GridFunction:
    samples = resolve_radii(p, radii)
    h, cv = f.spec.h, f.spec.cell_volume
    shift = 3 - f.spec.n
    factors = p.factors()
    g3 = _as3d(f.values)
    best = np.zeros(g3.shape)

    def descend(level: int, g: np.ndarray, denom: float) -> None:
        if level == len(factors):
            np.maximum(best, g * cv / denom, out=best)
            return
        fac = factors[level]
        axes = tuple(range(fac.start + shift, fac.start + fac.dim + shift))
        vol = ball_volume(fac.dim)
        summer = _BallSummer(g, axes)
        for r in samples[level]:
            descend(level + 1, summer(r / h), denom * (vol * r**fac.dim))

    descend(0, g3, 1.0)
    return _finish(best, f)


def _finish(best: np.ndarray, f: GridFunction) -> GridFunction:
    out = np.maximum(best, 0.0).reshape(f.spec.shape)
    if _fault:
        out = out + _fault
    return GridFunction(f.spec, out)


def truncated_max(f: GridFunction, p: TruncationParams, radii=64) -> GridFunction:
    """Truncated maximal function over balls with radii sampled in [a, b]."""
    _check(f, p, "scalar")
    return _product_ball_max(f, p, radii)


def general_truncated_max(f: GridFunction, p: TruncationParams, radii=64) -> GridFunction:
    """Maximal function over products of balls, one ball per block of the partition."""
    _check(f, p, "general")
    return _product_ball_max(f, p, radii)


def _support_region(g3: np.ndarray, reach: list[int]) -> tuple[int, ...]:
    nonzero = np.nonzero(g3)
    if nonzero[0].size == 0:
        return (0, 0, 0, 0, 0, 0)
    region = []
    for ax in range(3):
        lo = max(int(nonzero[ax].min()) - reach[ax], 0)
        hi = min(int(nonzero[ax].max()) + reach[ax] + 1, g3.shape[ax])
        region += [lo, hi]
    return tuple(region)


def strong_truncated_max(f: GridFunction, p: TruncationParams, radii=64) -> GridFunction:
    """Maximal function over centred axis-parallel boxes with half-sides in [a_i, b_i]."""
    _check(f, p, "strong")
    samples = resolve_radii(p, radii)
    shift = 3 - f.spec.n
    widths = [np.zeros(1, dtype=np.int64)] * shift
    sides = [np.ones(1)] * shift
    for s in samples:
        widths.append(np.floor(s / f.spec.h + MEMBERSHIP_EPS).astype(np.int64))
        sides.append(2.0 * s)
    g3 = _as3d(f.values)
    region = _support_region(g3, [int(w.max()) for w in widths])
    S = kernels.summed_area_table(g3)
    best = kernels.backend.box_max(S, widths, sides, region, _threads)
    return _finish(best * f.spec.cell_volume, f)


def apply_operator(f: GridFunction, p: TruncationParams, radii=64) -> GridFunction:
    """Dispatch on ``p.kind``."""
    if p.kind == "scalar":
        return truncated_max(f, p, radii)
    if p.kind == "strong":
        return strong_truncated_max(f, p, radii)
    return general_truncated_max(f, p, radii)


DEFAULT_ORACLE_BUDGET = 2 * 10**9


def truncated_max_oracle(f: GridFunction, p: TruncationParams, radii=64,
                         budget: int = DEFAULT_ORACLE_BUDGET) -> GridFunction:
    """Brute force: for each cell and each sampled set, sum f over the member cells.

    Membership is decided from cell-centre coordinates; no stencils, prefix
    sums or summed-area tables are shared with the optimised kernels. A box
    of half-sides s_i is the product of 1-D balls, so every kind reduces to
    products of balls here.
    """
    _check(f, p, None)
    samples = resolve_radii(p, radii)
    spec = f.spec
    N = spec.size
    combos = math.prod(len(s) for s in samples)
    work = N * N * combos
    if work > budget:
        raise BudgetError(f"oracle work {work} exceeds budget {budget}; use a smaller instance")
    pts = spec.points().reshape(N, spec.n)
    vals = f.values.ravel()
    factors = p.factors()
    letters = "abc"[: len(factors)]
    spec_str = ",".join(f"{c}y" for c in letters) + ",y->" + letters
    out = np.zeros(N)
    for idx in range(N):
        diff = (pts - pts[idx]) / spec.h
        masks = []
        for fac, r in zip(factors, samples):
            d2 = np.sum(diff[:, fac.start : fac.start + fac.dim] ** 2, axis=1)
            lim = (r / spec.h + MEMBERSHIP_EPS) ** 2
            masks.append((d2[None, :] <= lim[:, None]).astype(np.float64))
        sums = np.einsum(spec_str, *masks, vals)
        denom = np.ones(())
        for fac, r in zip(factors, samples):
            denom = np.multiply.outer(denom, ball_volume(fac.dim) * r**fac.dim)
        out[idx] = np.max(sums * spec.cell_volume / denom)
    return GridFunction(spec, np.maximum(out, 0.0).reshape(spec.shape))
