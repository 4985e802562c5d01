"""Convergence studies and property drivers around the sharp constants."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .constants import ControlFunctionSpec, control_eval, control_l1_norm, crude_upper_bound, sharp_l1_norm
from .errors import GuardError, ParameterError
from .grid import GridFunction, GridSpec, Rect, SimpleFunction, extremal_fm, l1_norm, simple_function_to_grid
from .operators import apply_operator
from .params import TruncationParams

CSV_HEADER = ("m", "h", "radii", "ratio", "w_norm", "sharp", "crude")


def fmt(x: float) -> str:
    return f"{x:.12g}"


def round12(x: float) -> float:
    return float(fmt(x))


def params_dict(p: TruncationParams) -> dict:
    return {"kind": p.kind, "n": p.n, "a": list(p.a), "b": list(p.b), "partition": list(p.partition)}


@dataclass(frozen=True)
class ConvergenceRecord:
    m: float
    h: float
    radii: int
    ratio: float
    w_norm: float
    sharp: float
    crude: float
    mass_budget: float = 0.0
    radius_budget: float = 0.0

    def row(self) -> list[str]:
        return [fmt(getattr(self, k)) if k != "radii" else str(self.radii) for k in CSV_HEADER]

    def violations(self, a_min: float) -> list[str]:
        found = []
        if not self.w_norm <= self.sharp <= self.crude:
            found.append("w_norm <= sharp <= crude")
        if self.ratio > self.crude * (1 + 5 * self.h / a_min):
            found.append("ratio <= crude * (1 + 5h/a)")
        return found


def study_grid(p: TruncationParams, m: float, h: float, half_width: float | None = None) -> GridSpec:
    """Centred grid wide enough that the maximal function of f_m is not cut off."""
    need = max(p.b) + 1.0 / m
    if half_width is None:
        half_width = need + 2 * h
    elif half_width < need:
        raise ParameterError(f"half width {half_width} is below b + 1/m = {need}")
    return GridSpec.centered(p.n, h, half_width)


def convergence_study(p: TruncationParams, m_list: Iterable[float], h_list: Iterable[float],
                      radii_count: int = 64, half_width: float | None = None) -> list[ConvergenceRecord]:
    """Ratio ||Max f_m||_1 / ||f_m||_1 for every (m, h) pair, sorted by (m, h)."""
    sharp, crude = sharp_l1_norm(p), crude_upper_bound(p)
    records = []
    for m in sorted(set(m_list)):
        w_norm = control_l1_norm(ControlFunctionSpec.lower(p, m))
        for h in sorted(set(h_list)):
            try:
                spec = study_grid(p, m, h, half_width)
                f = extremal_fm(m, spec)
                out = apply_operator(f, p, radii_count)
            except GuardError as exc:
                raise type(exc)(f"(m={m}, h={h}): {exc}") from exc
            radius_budget = sum(fa.dim * math.log(fa.b / fa.a) for fa in p.factors()) / max(radii_count - 1, 1)
            records.append(ConvergenceRecord(
                m=m, h=h, radii=radii_count, ratio=l1_norm(out) / l1_norm(f), w_norm=w_norm,
                sharp=sharp, crude=crude, mass_budget=p.n * h * m, radius_budget=radius_budget,
            ))
    return records


def records_csv(records: Sequence[ConvergenceRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def records_report(p: TruncationParams, records: Sequence[ConvergenceRecord]) -> dict:
    violations = []
    for rec in records:
        for what in rec.violations(min(p.a)):
            violations.append({"m": rec.m, "h": rec.h, "invariant": what})
    return {
        "params": params_dict(p),
        "records": [{k: (round12(v) if isinstance(v, float) else v) for k, v in asdict(r).items()} for r in records],
        "violations": violations,
    }


# --- pointwise sandwich -----------------------------------------------------------


@dataclass
class SideReport:
    max_violation: float
    location: list[float]
    count: int
    tol: float
    grid_norm: float
    closed_form: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol


@dataclass
class SandwichReport:
    upper: SideReport
    lower: SideReport

    @property
    def passed(self) -> bool:
        return self.upper.passed and self.lower.passed

    def as_dict(self) -> dict:
        out = {}
        for name, side in (("upper", self.upper), ("lower", self.lower)):
            d = {k: (round12(v) if isinstance(v, float) else v) for k, v in asdict(side).items()}
            d["location"] = [round12(c) for c in side.location]
            d["passed"] = side.passed
            out[name] = d
        out["passed"] = self.passed
        return out


def _side(excess: np.ndarray, points: np.ndarray, tol: float, grid_norm: float, closed: float) -> SideReport:
    idx = np.unravel_index(int(np.argmax(excess)), excess.shape)
    return SideReport(float(excess[idx]), [float(c) for c in points[idx]], int(np.sum(excess > tol)),
                      tol, grid_norm, closed)


def cube_density(s: float, spec: GridSpec) -> GridFunction:
    """Unit-mass indicator of the centred cube [-s, s)^n."""
    g = simple_function_to_grid(SimpleFunction((1.0,), (Rect((-s,) * spec.n, (s,) * spec.n),)), spec)
    mass = l1_norm(g)
    if mass == 0:
        raise GuardError(f"cube of half-side {s} contains no cell centre at h={spec.h}")
    return g.scaled(1.0 / mass)


def pointwise_sandwich_check(p: TruncationParams, m: float, s: float, h: float, radii_count: int = 64,
                             half_width: float | None = None) -> SandwichReport:
    """Compare Max g against u (from above) and Max f_m against w (from below) on every cell.

    g is the unit-mass cube of half-side s. The tolerance on each side is
    5h * sup(control) / min(a).
    """
    reach = max(max(p.b) + math.sqrt(p.n) * s, max(p.b) + 1.0 / m)
    spec = GridSpec.centered(p.n, h, (half_width or reach + 2 * h))
    pts = spec.points()
    a_min = min(p.a)

    u_spec = ControlFunctionSpec.upper(p, s)
    g = cube_density(s, spec)
    mg = apply_operator(g, p, radii_count)
    u = control_eval(u_spec, pts)
    u_tol = 5 * h * float(u.max()) / a_min
    upper = _side(mg.values - u, pts, u_tol, l1_norm(mg), control_l1_norm(u_spec))

    w_spec = ControlFunctionSpec.lower(p, m)
    fm = extremal_fm(m, spec)
    mf = apply_operator(fm, p, radii_count)
    w = control_eval(w_spec, pts)
    w_tol = 5 * h * float(w.max()) / a_min
    lower = _side(w - mf.values, pts, w_tol, l1_norm(mf), control_l1_norm(w_spec))
    return SandwichReport(upper, lower)


# --- rearrangement ----------------------------------------------------------------


@dataclass(frozen=True)
class RearrangementResult:
    norm_f: float
    norm_g: float
    max_f: float
    max_g: float

    @property
    def masses_equal(self) -> bool:
        return self.norm_f == self.norm_g

    @property
    def passed(self) -> bool:
        return self.masses_equal and self.max_f <= self.max_g * (1 + 1e-6)


def simple_function_grid(sf: SimpleFunction, p: TruncationParams, h: float) -> GridSpec:
    """Grid aligned to multiples of h covering every box plus a margin of max(b)."""
    pad = max(p.b) + 2 * h
    lo = [min(r.lo[i] for r in sf.rects) - pad for i in range(sf.n)]
    hi = [max(r.hi[i] for r in sf.rects) + pad for i in range(sf.n)]
    i_lo = [math.floor(x / h) for x in lo]
    cells = tuple(math.ceil(y / h) - i for y, i in zip(hi, i_lo))
    return GridSpec(sf.n, h, tuple(i * h for i in i_lo), cells)


def rearrangement_check(sf: SimpleFunction, p: TruncationParams, h: float, radii_count: int = 16) -> RearrangementResult:
    """||Max f||_1 <= ||Max g||_1 for f = sum alpha_j 1_{O_j}, g = (sum alpha_j) 1_{O_1}."""
    if sf.n != p.n:
        raise ParameterError("simple function and parameters have different dimensions")
    spec = simple_function_grid(sf, p, h)
    f = simple_function_to_grid(sf, spec)
    g = simple_function_to_grid(sf.collapsed(), spec)
    return RearrangementResult(
        l1_norm(f), l1_norm(g),
        l1_norm(apply_operator(f, p, radii_count)), l1_norm(apply_operator(g, p, radii_count)),
    )


def random_simple_function(rng: np.random.Generator, n: int, h: float, max_pieces: int = 5,
                           spread: float = 3.0) -> SimpleFunction:
    """Disjoint translates of a random box with corners on the h-lattice and dyadic weights.

    Dyadic weights keep the mass identity exact in floating point.
    """
    pieces = int(rng.integers(1, max_pieces + 1))
    sides = rng.integers(1, 5, size=n)
    extent = max(int(spread / h), int(sides.max()) * 2 * pieces)
    rects: list[Rect] = []
    while len(rects) < pieces:
        corner = rng.integers(-extent, extent, size=n)
        rect = Rect(tuple(float(c * h) for c in corner), tuple(float((c + w) * h) for c, w in zip(corner, sides)))
        if not any(rect.overlaps(r) for r in rects):
            rects.append(rect)
    alphas = tuple(float(v) / 8.0 for v in rng.integers(1, 33, size=pieces))
    return SimpleFunction(alphas, tuple(rects))


@dataclass
class RearrangementReport:
    trials: int
    violations: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"trials": self.trials, "violations": self.violations, "passed": self.passed}


def rearrangement_trials(p: TruncationParams, h: float, radii_count: int, trials: int, seed: int = 0,
                         max_pieces: int = 5) -> RearrangementReport:
    rng = np.random.default_rng(seed)
    report = RearrangementReport(trials)
    for t in range(trials):
        sf = random_simple_function(rng, p.n, h, max_pieces)
        res = rearrangement_check(sf, p, h, radii_count)
        if not res.passed:
            report.violations.append({"trial": t, "N": sf.N, **{k: round12(v) for k, v in asdict(res).items()}})
    return report


# --- discrete crude bound -----------------------------------------------------------


def crude_bound_ratio(f: GridFunction, p: TruncationParams, radii_count: int = 16) -> tuple[float, float]:
    """Return (||Max f||_1 / ||f||_1, crude * (1 + 5h/min a))."""
    ratio = l1_norm(apply_operator(f, p, radii_count)) / l1_norm(f)
    return ratio, crude_upper_bound(p) * (1 + 5 * f.spec.h / min(p.a))
