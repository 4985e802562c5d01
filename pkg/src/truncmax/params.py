"""Truncation parameters and radius sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError, ResolutionError

KINDS = ("scalar", "strong", "general")
MAX_GRID_DIM = 3


@dataclass(frozen=True)
class Factor:
    """One ball factor: radii in [a, b] over ``dim`` consecutive axes starting at ``start``."""

    start: int
    dim: int
    a: float
    b: float


@dataclass(frozen=True)
class TruncationParams:
    """Truncation radii for the three operator kinds.

    ``a`` and ``b`` are tuples: length 1 for ``scalar``, length ``n`` for
    ``strong`` and length ``k`` (number of factors) for ``general``.
    """

    kind: str
    n: int
    a: tuple[float, ...]
    b: tuple[float, ...]
    partition: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise ParameterError(f"dimension n must be a positive integer, got {self.n!r}")
        if len(self.a) != len(self.b) or len(self.a) != len(self.partition):
            raise ParameterError(
                f"a, b and partition lengths differ: {len(self.a)}, {len(self.b)}, {len(self.partition)}"
            )
        if any(p < 1 for p in self.partition) or sum(self.partition) != self.n:
            raise ParameterError(f"partition {self.partition} must be positive and sum to n={self.n}")
        for ai, bi in zip(self.a, self.b):
            if not (math.isfinite(ai) and math.isfinite(bi) and 0 < ai <= bi):
                raise ParameterError(f"need 0 < a <= b < inf componentwise, got a={ai}, b={bi}")

    @classmethod
    def scalar(cls, a: float, b: float, n: int = 1) -> "TruncationParams":
        return cls("scalar", n, (float(a),), (float(b),), (n,))

    @classmethod
    def strong(cls, a: Sequence[float], b: Sequence[float]) -> "TruncationParams":
        a, b = tuple(map(float, a)), tuple(map(float, b))
        return cls("strong", len(a), a, b, (1,) * len(a))

    @classmethod
    def general(cls, partition: Sequence[int], a: Sequence[float], b: Sequence[float]) -> "TruncationParams":
        partition = tuple(int(p) for p in partition)
        return cls("general", sum(partition), tuple(map(float, a)), tuple(map(float, b)), partition)

    @property
    def k(self) -> int:
        return len(self.partition)

    @property
    def theta(self) -> float:
        if self.kind != "scalar":
            raise ParameterError("theta = b/a is defined for the scalar kind only")
        return self.b[0] / self.a[0]

    def factors(self) -> list[Factor]:
        out, start = [], 0
        for dim, ai, bi in zip(self.partition, self.a, self.b):
            out.append(Factor(start, dim, ai, bi))
            start += dim
        return out


@dataclass(frozen=True)
class RadiiResolution:
    """Number of log-uniform radius samples per truncation interval."""

    count: int = 64

    def __post_init__(self):
        if not isinstance(self.count, (int, np.integer)) or self.count < 1:
            raise ParameterError(f"radius count must be a positive integer, got {self.count!r}")

    def samples(self, a: float, b: float) -> np.ndarray:
        return sample_radii(a, b, self.count)


def sample_radii(a: float, b: float, count: int) -> np.ndarray:
    """Geometric samples a = r_0 < ... < r_{count-1} = b (a single sample when a == b)."""
    if a == b:
        return np.array([float(a)])
    if count < 2:
        raise ResolutionError(f"interval [{a}, {b}] needs at least 2 radius samples, got {count}")
    r = np.geomspace(a, b, count)
    r[0], r[-1] = a, b
    return r


def resolve_radii(p: TruncationParams, radii) -> list[np.ndarray]:
    """Per-factor radius samples from a count, a RadiiResolution, or explicit arrays.

    Explicit arrays must be given one per factor (``p.k`` of them).
    """
    if isinstance(radii, RadiiResolution):
        radii = radii.count
    if isinstance(radii, (int, np.integer)):
        res = RadiiResolution(int(radii))
        return [res.samples(f.a, f.b) for f in p.factors()]
    samples = [np.asarray(r, dtype=float).ravel() for r in radii]
    if len(samples) != p.k:
        raise ParameterError(f"expected {p.k} radius arrays, got {len(samples)}")
    for r, f in zip(samples, p.factors()):
        if r.size == 0 or np.any(r <= 0) or not np.all(np.isfinite(r)):
            raise ParameterError("explicit radii must be positive and finite")
        if f.a < f.b and r.size < 2:
            raise ResolutionError(f"interval [{f.a}, {f.b}] needs at least 2 radius samples")
    return samples
