"""Sharp L1 operator norms, crude bounds, and the bracketing control functions.

The control functions are products of one radial profile per ball factor.
For a factor of dimension d with truncation [a, b] and offset ``delta``
(``sqrt(d) * s`` for the upper function, ``-1/m`` for the lower one) the
profile is

    1 / (V_d a^d)               for |x| <= a + delta
    1 / (V_d (|x| - delta)^d)   for a + delta < |x| <= b + delta
    0                           beyond,

with boundaries assigned to the inner piece. Its integral is
``(a + delta)^d / a^d + d * (log(b/a) + series)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .geometry import ball_volume, series_A, series_B
from .params import Factor, TruncationParams

VARIANTS = ("upper_u", "lower_w")


def sharp_l1_norm(p: TruncationParams) -> float:
    """prod_i (1 + n_i log(b_i / a_i)); the scalar kind is the single-factor case."""
    return math.prod(1.0 + f.dim * math.log(f.b / f.a) for f in p.factors())


def crude_upper_bound(p: TruncationParams) -> float:
    return math.prod((f.b / f.a) ** f.dim for f in p.factors())


def growth_rate_check(p: TruncationParams) -> float:
    """sharp / log(b/a) = n + 1/log(b/a), which tends to n as b/a grows."""
    if p.kind != "scalar":
        raise ParameterError("growth rate is defined for the scalar kind")
    if p.b[0] == p.a[0]:
        raise ParameterError("growth rate needs b > a (log(b/a) = 0)")
    return sharp_l1_norm(p) / math.log(p.theta)


@dataclass(frozen=True)
class ControlFunctionSpec:
    """Upper (``upper_u``, perturbation s >= 0) or lower (``lower_w``, perturbation m) control function."""

    variant: str
    params: TruncationParams
    perturbation: float
    scale: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParameterError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.variant == "upper_u":
            if not self.perturbation >= 0:
                raise ParameterError(f"u needs s >= 0, got {self.perturbation}")
            if not self.scale > 0:
                raise ParameterError("scale must be positive")
        else:
            if not self.perturbation > 0:
                raise ParameterError(f"w needs m > 0, got {self.perturbation}")
            if self.scale != 1.0:
                raise ParameterError("w carries unit scale")
            bad = [f.a for f in self.params.factors() if not f.a - 1.0 / self.perturbation > 0]
            if bad:
                raise ParameterError(f"w needs a - 1/m > 0; m={self.perturbation} too small for a={bad[0]}")

    def delta(self, fac: Factor) -> float:
        if self.variant == "upper_u":
            return math.sqrt(fac.dim) * self.perturbation
        return -1.0 / self.perturbation

    @classmethod
    def upper(cls, p: TruncationParams, s: float, scale: float = 1.0) -> "ControlFunctionSpec":
        return cls("upper_u", p, float(s), float(scale))

    @classmethod
    def lower(cls, p: TruncationParams, m: float) -> "ControlFunctionSpec":
        return cls("lower_w", p, float(m))


def _profile(r: np.ndarray, fac: Factor, delta: float) -> np.ndarray:
    vol = ball_volume(fac.dim)
    inner = r <= fac.a + delta
    ring = ~inner & (r <= fac.b + delta)
    out = np.zeros_like(r)
    out[inner] = 1.0 / (vol * fac.a**fac.dim)
    out[ring] = 1.0 / (vol * (r[ring] - delta) ** fac.dim)
    return out


def control_eval(spec: ControlFunctionSpec, x: Sequence[float] | np.ndarray) -> float | np.ndarray:
    """Evaluate u or w at one point (shape (n,)) or at many (shape (..., n))."""
    pts = np.asarray(x, dtype=float)
    n = spec.params.n
    if pts.shape[-1:] != (n,):
        raise ParameterError(f"points must have trailing dimension {n}, got shape {pts.shape}")
    value = np.full(pts.shape[:-1], spec.scale)
    for fac in spec.params.factors():
        r = np.sqrt(np.sum(pts[..., fac.start : fac.start + fac.dim] ** 2, axis=-1))
        value = value * _profile(r, fac, spec.delta(fac))
    return float(value) if value.ndim == 0 else value


def _factor_norm(spec: ControlFunctionSpec, fac: Factor) -> float:
    delta = spec.delta(fac)
    core = ((fac.a + delta) / fac.a) ** fac.dim
    log = math.log(fac.b / fac.a)
    if fac.dim == 1:
        return core + log
    if spec.variant == "upper_u":
        series = series_A(spec.perturbation, fac.a, fac.b, fac.dim)
    else:
        series = series_B(spec.perturbation, fac.a, fac.b, fac.dim)
    return core + fac.dim * (log + series)


def control_l1_norm(spec: ControlFunctionSpec) -> float:
    """Closed-form L1 norm of u or w."""
    return spec.scale * math.prod(_factor_norm(spec, fac) for fac in spec.params.factors())
