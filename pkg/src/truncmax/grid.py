"""Sampled non-negative functions on uniform cell-centred grids.

Samples sit at cell centres ``lo[i] + (j + 0.5) * h``; integrals are
midpoint sums. Grids are 1-, 2- or 3-dimensional.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BudgetError, ParameterError, ResolutionError
from .geometry import ball_volume
from .params import MAX_GRID_DIM

DEFAULT_CELL_BUDGET = 2**27
FORMAT_VERSION = 1

# Membership slack in units of h: a cell centre at offset d is inside a ball of
# radius r when |d| <= r/h + MEMBERSHIP_EPS. Absorbs rounding of snapped radii.
MEMBERSHIP_EPS = 1e-9


@dataclass(frozen=True)
class GridSpec:
    n: int
    h: float
    lo: tuple[float, ...]
    cells: tuple[int, ...]
    budget: int = field(default=DEFAULT_CELL_BUDGET, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.n, int) or not 1 <= self.n <= MAX_GRID_DIM:
            raise ParameterError(f"grid dimension must be 1..{MAX_GRID_DIM}, got {self.n!r}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ParameterError(f"grid spacing must be positive, got {self.h}")
        if len(self.lo) != self.n or len(self.cells) != self.n:
            raise ParameterError("lo and cells must have one entry per axis")
        if any(int(c) != c or c < 1 for c in self.cells):
            raise ParameterError(f"cell counts must be positive integers, got {self.cells}")
        if self.size > self.budget:
            raise BudgetError(f"grid has {self.size} cells, budget is {self.budget}")

    @classmethod
    def centered(cls, n: int, h: float, half_width: float, **kw) -> "GridSpec":
        """Grid on [-L, L]^n with L = half_width rounded up to a whole number of cells."""
        half = math.ceil(half_width / h - 1e-9)
        return cls(n, float(h), (-half * h,) * n, (2 * half,) * n, **kw)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.cells)

    @property
    def size(self) -> int:
        return math.prod(int(c) for c in self.cells)

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    def axis_centers(self, axis: int) -> np.ndarray:
        return self.lo[axis] + (np.arange(self.cells[axis]) + 0.5) * self.h

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*(self.axis_centers(i) for i in range(self.n)), indexing="ij", sparse=True)

    def points(self) -> np.ndarray:
        """Cell centres as an array of shape ``cells + (n,)``."""
        full = np.meshgrid(*(self.axis_centers(i) for i in range(self.n)), indexing="ij")
        return np.stack(full, axis=-1)

    def index_of(self, x: Sequence[float]) -> tuple[int, ...]:
        """Index of the cell containing point ``x``."""
        idx = tuple(int(math.floor((x[i] - self.lo[i]) / self.h)) for i in range(self.n))
        if any(not 0 <= j < c for j, c in zip(idx, self.cells)):
            raise ParameterError(f"point {tuple(x)} lies outside the grid")
        return idx

    def header(self) -> dict:
        return {"version": FORMAT_VERSION, "n": self.n, "h": self.h, "lo": list(self.lo), "cells": list(self.shape)}


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Non-negative samples on a :class:`GridSpec`; the array is made read-only."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != self.spec.shape:
            raise ParameterError(f"values shape {v.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(v)):
            raise ParameterError("grid values must be finite")
        if np.any(v < 0):
            raise ParameterError("grid values must be non-negative (store |f|)")
        if v is self.values:
            v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, spec: GridSpec) -> "GridFunction":
        return cls(spec, np.zeros(spec.shape))

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.spec, self.values * c)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        if other.spec != self.spec:
            raise ParameterError("cannot add functions on different grids")
        return GridFunction(self.spec, self.values + other.values)

    def at(self, x: Sequence[float]) -> float:
        return float(self.values[self.spec.index_of(x)])


def l1_norm(f: GridFunction) -> float:
    """Midpoint quadrature of f; exactly rounded sum in lexicographic cell order."""
    return f.spec.cell_volume * math.fsum(f.values.ravel(order="C"))


def indicator_ball(center: Sequence[float], radius: float, spec: GridSpec) -> GridFunction:
    """1 on cells whose centre lies in the closed ball, 0 elsewhere."""
    if not radius > 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    center = tuple(float(c) for c in center)
    if len(center) != spec.n:
        raise ParameterError("center dimension does not match the grid")
    d2 = sum(((x - c) / spec.h) ** 2 for x, c in zip(spec.mesh(), center))
    inside = d2 <= (radius / spec.h + MEMBERSHIP_EPS) ** 2
    if not inside.any():
        raise ParameterError("ball contains no cell centre of the grid")
    return GridFunction(spec, inside.astype(np.float64))


def extremal_fm(m: float, spec: GridSpec) -> GridFunction:
    """Unit-mass indicator of the ball B(0, 1/m), renormalised by its own quadrature."""
    if not m > 0:
        raise ParameterError(f"m must be positive, got {m}")
    radius = 1.0 / m
    if radius < 4 * spec.h * (1 - 1e-12):
        raise ResolutionError(
            f"f_m with m={m} needs h <= {radius / 4:.6g} (radius 1/m spans 4 cells), got h={spec.h:.6g}"
        )
    ind = indicator_ball((0.0,) * spec.n, radius, spec)
    return ind.scaled(1.0 / l1_norm(ind))


def expected_ball_mass(n: int, radius: float) -> float:
    return ball_volume(n) * radius**n


# --- simple functions -------------------------------------------------------------


@dataclass(frozen=True)
class Rect:
    """Half-open axis-aligned box [lo, hi)."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ParameterError(f"invalid rectangle lo={self.lo} hi={self.hi}")

    @property
    def sides(self) -> tuple[float, ...]:
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    def overlaps(self, other: "Rect") -> bool:
        return all(l1 < h2 and l2 < h1 for l1, h1, l2, h2 in zip(self.lo, self.hi, other.lo, other.hi))


@dataclass(frozen=True)
class SimpleFunction:
    """Non-negative combination of disjoint translated boxes, sum_j alpha_j 1_{O_j}."""

    alphas: tuple[float, ...]
    rects: tuple[Rect, ...]

    def __post_init__(self):
        if len(self.alphas) != len(self.rects) or not self.rects:
            raise ParameterError("need one weight per rectangle and at least one rectangle")
        if any(not (a >= 0 and math.isfinite(a)) for a in self.alphas):
            raise ParameterError("weights must be finite and non-negative")
        first = self.rects[0]
        for r in self.rects:
            if len(r.lo) != len(first.lo):
                raise ParameterError("rectangles have mismatched dimensions")
            if not np.allclose(r.sides, first.sides, rtol=0, atol=1e-9 * max(first.sides)):
                raise ParameterError("every rectangle must be a translate of the first")
        for i, r in enumerate(self.rects):
            for q in self.rects[i + 1 :]:
                if r.overlaps(q):
                    raise ParameterError(f"rectangles {r} and {q} overlap")

    @property
    def N(self) -> int:
        return len(self.rects)

    @property
    def n(self) -> int:
        return len(self.rects[0].lo)

    def collapsed(self) -> "SimpleFunction":
        """(sum_j alpha_j) 1_{O_1}: same mass, maximal function at least as large in L1."""
        return SimpleFunction((math.fsum(self.alphas),), (self.rects[0],))


def _index_range(lo: float, hi: float, origin: float, h: float, cells: int) -> tuple[int, int]:
    # cells whose centre lies in [lo, hi)
    i0 = math.ceil((lo - origin) / h - 0.5 - MEMBERSHIP_EPS)
    i1 = math.ceil((hi - origin) / h - 0.5 - MEMBERSHIP_EPS)
    return max(i0, 0), min(i1, cells)


def rect_slices(rect: Rect, spec: GridSpec) -> tuple[slice, ...]:
    return tuple(
        slice(*_index_range(rect.lo[i], rect.hi[i], spec.lo[i], spec.h, spec.cells[i])) for i in range(spec.n)
    )


def simple_function_to_grid(sf: SimpleFunction, spec: GridSpec) -> GridFunction:
    """Rasterise by centre-in-box membership with half-open boxes."""
    if sf.n != spec.n:
        raise ParameterError("simple function and grid dimensions differ")
    values = np.zeros(spec.shape)
    for alpha, rect in zip(sf.alphas, sf.rects):
        values[rect_slices(rect, spec)] += alpha
    return GridFunction(spec, values)


# --- file format ------------------------------------------------------------------


def write_grid(path: str | Path, f: GridFunction) -> None:
    """JSON header line, then little-endian float64 payload in C order."""
    header = json.dumps(f.spec.header(), separators=(",", ":"))
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii") + b"\n")
        fh.write(f.values.astype("<f8").tobytes(order="C"))


def read_grid(path: str | Path) -> GridFunction:
    with open(path, "rb") as fh:
        line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(line)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParameterError(f"{path}: bad grid header ({exc})") from exc
    if not isinstance(header, dict) or header.get("version") != FORMAT_VERSION:
        raise ParameterError(f"{path}: unsupported grid file version {header!r}")
    try:
        spec = GridSpec(int(header["n"]), float(header["h"]), tuple(map(float, header["lo"])),
                        tuple(int(c) for c in header["cells"]))
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"{path}: incomplete grid header") from exc
    if len(payload) != 8 * spec.size:
        raise ParameterError(f"{path}: payload has {len(payload)} bytes, expected {8 * spec.size}")
    values = np.frombuffer(payload, dtype="<f8").reshape(spec.shape)
    return GridFunction(spec, values.astype(np.float64))


def read_csv_1d(path: str | Path, h: float, lo: float) -> GridFunction:
    """One value per line (blank lines and ``#`` comments skipped) for a 1-D grid."""
    text = Path(path).read_text()
    try:
        values = np.loadtxt(io.StringIO(text), dtype=np.float64, ndmin=1, comments="#", delimiter=",")
    except ValueError as exc:
        raise ParameterError(f"{path}: cannot parse CSV ({exc})") from exc
    if values.ndim != 1:
        raise ParameterError(f"{path}: expected a single column")
    return GridFunction(GridSpec(1, float(h), (float(lo),), (values.size,)), values)
