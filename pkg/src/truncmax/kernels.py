"""Kernel backend selection and the compensated prefix-sum builders.

The compiled backend is used when importable; set ``TRUNCMAX_PURE_PYTHON=1``
to force the numpy fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

import numpy as np

from . import _pykernels


def _compiled() -> ModuleType | None:
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


def available_backends() -> dict[str, ModuleType]:
    found = {_pykernels.NAME: _pykernels}
    mod = _compiled()
    if mod is not None:
        found[mod.NAME] = mod
    return found


def _default() -> ModuleType:
    if os.environ.get("TRUNCMAX_PURE_PYTHON", "") not in ("", "0"):
        return _pykernels
    return _compiled() or _pykernels


backend: ModuleType = _default()


def use_backend(name: str) -> ModuleType:
    """Switch the active backend by name ('cython' or 'numpy'); returns the previous one."""
    global backend
    found = available_backends()
    if name not in found:
        raise ValueError(f"backend {name!r} not available (have {sorted(found)})")
    previous, backend = backend, found[name]
    return previous


def _kahan_scan(values: np.ndarray, axis: int) -> np.ndarray:
    """Inclusive compensated running sum along ``axis``, with a leading zero slot."""
    v = np.moveaxis(values, axis, 0)
    out = np.zeros((v.shape[0] + 1,) + v.shape[1:])
    s = np.zeros(v.shape[1:])
    c = np.zeros(v.shape[1:])
    for t in range(v.shape[0]):
        y = v[t] - c
        tot = s + y
        c = (tot - s) - y
        s = tot
        out[t + 1] = s
    return np.moveaxis(out, 0, axis)


def line_prefix(g: np.ndarray) -> np.ndarray:
    """Prefix sums along the last axis, shape (..., X+1)."""
    return np.ascontiguousarray(_kahan_scan(g, g.ndim - 1))


def summed_area_table(g: np.ndarray) -> np.ndarray:
    """3-D summed-area table padded with a zero leading plane per axis."""
    s = g
    for axis in range(g.ndim - 1, -1, -1):
        s = _kahan_scan(s, axis)
    return np.ascontiguousarray(s)
