"""Seeded verification suites behind ``truncmax verify``."""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .constants import ControlFunctionSpec, control_l1_norm, crude_upper_bound, sharp_l1_norm
from .experiments import crude_bound_ratio, pointwise_sandwich_check, rearrangement_trials, round12
from .grid import GridFunction, GridSpec
from .operators import apply_operator, truncated_max_oracle
from .params import TruncationParams

ORACLE_TOL = 1e-12
SUITES = ("oracle-equivalence", "sandwich", "rearrangement", "bound")


def random_params(rng: np.random.Generator, kind: str, n: int) -> TruncationParams:
    if kind == "scalar":
        a = float(rng.uniform(0.2, 0.6))
        return TruncationParams.scalar(a, a * float(rng.uniform(1.0, 3.0)), n)
    if kind == "strong":
        a = rng.uniform(0.2, 0.6, size=n)
        return TruncationParams.strong(a, a * rng.uniform(1.0, 3.0, size=n))
    partitions = {1: [(1,)], 2: [(2,), (1, 1)], 3: [(3,), (2, 1), (1, 2)]}[n]
    part = partitions[int(rng.integers(len(partitions)))]
    a = rng.uniform(0.2, 0.6, size=len(part))
    return TruncationParams.general(part, a, a * rng.uniform(1.0, 3.0, size=len(part)))


def random_instance(rng: np.random.Generator, kind: str, max_cells: int = 24, n: int | None = None):
    """Small random grid function, parameters and radius count."""
    n = n or int(rng.integers(1, 3))
    h = 1.0 / 8
    cells = tuple(int(c) for c in rng.integers(6, max_cells + 1, size=n))
    spec = GridSpec(n, h, tuple(-c * h / 2 for c in cells), cells)
    values = rng.random(spec.shape) * (rng.random(spec.shape) < 0.4)
    p = random_params(rng, kind, n)
    return GridFunction(spec, values), p, int(rng.integers(2, 5))


def oracle_suite(rng: np.random.Generator, instances: int) -> dict:
    worst, cases = 0.0, []
    for kind in ("scalar", "strong", "general"):
        for _ in range(instances):
            f, p, radii = random_instance(rng, kind)
            dev = float(np.max(np.abs(apply_operator(f, p, radii).values - truncated_max_oracle(f, p, radii).values)))
            worst = max(worst, dev)
            if dev > ORACLE_TOL:
                cases.append({"kind": kind, "n": p.n, "deviation": dev})
    return {"instances": 3 * instances, "max_deviation": worst, "failures": cases[:5], "passed": not cases}


def sandwich_suite() -> dict:
    p = TruncationParams.scalar(1.0, math.e, 1)
    report = pointwise_sandwich_check(p, m=16, s=1.0 / 32, h=1.0 / 512, radii_count=128)
    return report.as_dict()


def rearrangement_suite(seed: int, trials: int) -> dict:
    one = rearrangement_trials(TruncationParams.scalar(0.5, 1.5, 1), 1.0 / 16, 8, trials, seed)
    two = rearrangement_trials(TruncationParams.scalar(0.5, 1.5, 2), 1.0 / 8, 6, trials, seed + 1)
    return {"n1": one.as_dict(), "n2": two.as_dict(), "passed": one.passed and two.passed}


def bound_suite(rng: np.random.Generator, instances: int) -> dict:
    failures = []
    for kind in ("scalar", "strong", "general"):
        for _ in range(instances):
            f, p, radii = random_instance(rng, kind)
            ratio, limit = crude_bound_ratio(f, p, radii)
            sharp, crude = sharp_l1_norm(p), crude_upper_bound(p)
            m = 2.0 / min(p.a) + 1.0
            w_norm = control_l1_norm(ControlFunctionSpec.lower(p, m))
            if ratio > limit or not w_norm <= sharp <= crude:
                failures.append({"kind": kind, "ratio": round12(ratio), "limit": round12(limit)})
    return {"instances": 3 * instances, "failures": failures, "passed": not failures}


def run_verification(seed: int = 0, instances: int = 5, trials: int = 20) -> dict:
    rng = np.random.default_rng(seed)
    suites = {
        "oracle-equivalence": oracle_suite(rng, instances),
        "sandwich": sandwich_suite(),
        "rearrangement": rearrangement_suite(seed, trials),
        "bound": bound_suite(rng, instances),
    }
    failed = [name for name in SUITES if not suites[name]["passed"]]
    return {
        "backend": kernels.backend.NAME,
        "seed": seed,
        "suites": _rounded(suites),
        "failed": failed,
        "passed": not failed,
    }


def _rounded(obj):
    if isinstance(obj, float):
        return round12(obj)
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_rounded(v) for v in obj]
    return obj
