"""Continuous linear programs over functions on [0, 1] and their numerical checks.

The primal minimises ``int A z`` over nonincreasing ``z >= 0`` with
``z(0) = K``, the row constraint
``B(t) z(t) + int_0^t D(t, s) z(s) ds >= C(t)`` for every t, and the boundary
constraint ``z(1) + int_0^1 F z >= L``. The dual maximises
``int C w + L gamma - K y(0)`` subject to
``B(t) w(t) + int_t^1 D(s, t) w(s) ds + F(t) gamma + y'(t) <= A(t)``,
``gamma <= y(1)`` and ``w, y, gamma >= 0``.

Checks sample the constraints on a uniform grid plus every knot. Integrals use
Simpson's rule split at knots (see ``quadrature``). Terms involving ``z'`` or
``y'`` skip a small window around the knots where the derivative is undefined.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .quadrature import DEFAULT_STEP, Fn, Kernel, Piecewise, integrate_product, running_integral

DEFAULT_GRID = 10_000
DEFAULT_TOL = 1e-9
KNOT_WINDOW = 1e-12


class InfeasibleError(ValueError):
    """A duality gap was requested for a pair that fails a feasibility check."""


def _const(c: float) -> Fn:
    return lambda t: np.full(np.shape(t), c, dtype=float)


@dataclass(frozen=True)
class ContinuousLpSpec:
    """Data of the program. ``A, B, C, F`` take theta arrays; ``D`` takes
    ``(theta, lam)`` arrays that broadcast together. All are expected to be
    continuous on [0, 1] (and ``D`` on the square)."""

    K: float
    L: float
    A: Fn
    B: Fn
    C: Fn
    D: Kernel
    F: Fn

    def kernel_min(self, grid: int = 64) -> float:
        t = np.linspace(0.0, 1.0, grid + 1)
        return float(np.min(np.broadcast_to(self.D(t[:, None], t[None, :]), (grid + 1, grid + 1))))

    def validate(self, grid: int = 64) -> None:
        if self.kernel_min(grid) < 0:
            raise ValueError("D must be non-negative")


@dataclass(frozen=True)
class PrimalFunction:
    z: Piecewise
    area: Optional[float | Fraction] = None

    @property
    def breakpoints(self) -> np.ndarray:
        return self.z.interior_knots

    def __call__(self, theta) -> np.ndarray:
        return self.z(theta)

    def derivative(self, theta) -> np.ndarray:
        return self.z.derivative(theta)

    def integral(self, h: float = DEFAULT_STEP):
        """Exact rectangle sum for embedded step functions, Simpson otherwise."""
        if self.area is not None:
            return self.area
        return integrate_product([self.z], h=h)


@dataclass(frozen=True)
class DualTriple:
    w: Piecewise
    y: Piecewise
    gamma: float

    @property
    def breakpoints(self) -> np.ndarray:
        return np.union1d(self.w.interior_knots, self.y.interior_knots)


@dataclass(frozen=True)
class ClosedFormSolution:
    mu: float
    gamma: float
    value: float


def lp_infinity_spec() -> ContinuousLpSpec:
    return ContinuousLpSpec(
        K=1.0,
        L=1.0,
        A=_const(1.0),
        B=lambda t: 1.0 - np.asarray(t, dtype=float),
        C=_const(1.0),
        D=lambda t, s: np.full(np.broadcast(t, s).shape, 2.0),
        F=_const(1.5),
    )


def closed_form_mu() -> float:
    # smaller root of 3 mu^2 - 10 mu + 6; the larger one exceeds 1
    return (5.0 - math.sqrt(7.0)) / 3.0


def optimal_value() -> float:
    return 2.0 * (5.0 - math.sqrt(7.0)) / 9.0


def closed_form() -> tuple[PrimalFunction, DualTriple, ClosedFormSolution]:
    mu = closed_form_mu()
    denom = 5.0 - 3.0 * mu
    gamma = 2.0 * (1.0 - mu) / denom
    wc = 2.0 * (1.0 - mu) ** 2 / denom
    knots = (0.0, mu, 1.0)
    zero = _const(0.0)

    z = Piecewise(
        knots,
        (lambda t: 1.0 - np.asarray(t, dtype=float), _const(1.0 - mu)),
        (_const(-1.0), zero),
    )
    w = Piecewise(
        knots,
        (lambda t: wc / (1.0 - np.asarray(t, dtype=float)) ** 3, zero),
        (lambda t: 3.0 * wc / (1.0 - np.asarray(t, dtype=float)) ** 4, zero),
    )
    y = Piecewise(
        knots,
        (zero, lambda t: 2.0 * (np.asarray(t, dtype=float) - mu) / denom),
        (zero, _const(2.0 / denom)),
    )
    sol = ClosedFormSolution(mu, gamma, 1.0 - mu + mu * mu / 2.0)
    return PrimalFunction(z), DualTriple(w, y, gamma), sol


def constant_primal(c: float = 1.0) -> PrimalFunction:
    return PrimalFunction(Piecewise.smooth(_const(c), _const(0.0)))


def zero_dual() -> DualTriple:
    zero = Piecewise.smooth(_const(0.0), _const(0.0))
    return DualTriple(zero, zero, 0.0)


def embed_step(x: Sequence, tol: float = DEFAULT_TOL) -> PrimalFunction:
    """Step function equal to ``x[t-1]`` on ``((t-1)/n, t/n]`` with value ``x[0]`` at 0."""
    n = len(x)
    if n == 0:
        raise ValueError("x must be non-empty")
    if abs(float(x[0]) - 1.0) > tol:
        raise ValueError(f"x_1 must equal 1, got {float(x[0])}")
    for t in range(1, n):
        if float(x[t]) - float(x[t - 1]) > tol:
            raise ValueError(f"x must be nonincreasing: x_{t + 1} > x_{t}")
    for t in range(n):
        if float(x[t]) < -tol:
            raise ValueError(f"x must be nonnegative: x_{t + 1} = {float(x[t])}")
    knots = [t / n for t in range(n + 1)]
    if all(isinstance(v, (int, Fraction)) for v in x):
        area = sum(Fraction(v) for v in x) / n
    else:
        area = math.fsum(float(v) for v in x) / n
    return PrimalFunction(Piecewise.step(knots, [float(v) for v in x]), area)


@dataclass(frozen=True)
class FamilyResult:
    family: str
    max_violation: float
    theta: float
    passed: bool


@dataclass(frozen=True)
class CheckReport:
    kind: str
    tol: float
    families: tuple[FamilyResult, ...]

    @property
    def ok(self) -> bool:
        return all(f.passed for f in self.families)

    def __getitem__(self, family: str) -> FamilyResult:
        for f in self.families:
            if f.family == family:
                return f
        raise KeyError(family)

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        if header:
            out.writerow(["check", "family", "max_violation", "theta", "status"])
        for f in self.families:
            out.writerow([self.kind, f.family, f"{f.max_violation:.6e}", f"{f.theta:.12g}",
                          "pass" if f.passed else "fail"])
        return buf.getvalue()


def _worst(family: str, values: np.ndarray, thetas: np.ndarray, tol: float) -> FamilyResult:
    """Largest entry of ``values`` (a violation, so <= tol passes)."""
    if len(values) == 0:
        return FamilyResult(family, 0.0, float("nan"), True)
    k = int(np.argmax(values))
    v = float(values[k]) + 0.0
    return FamilyResult(family, v, float(thetas[k]), v <= tol)


def _samples(grid: int, *knot_sets: np.ndarray) -> np.ndarray:
    if grid < 2:
        raise ValueError(f"grid must be at least 2, got {grid}")
    parts = [np.linspace(0.0, 1.0, grid + 1)] + [np.asarray(k, dtype=float) for k in knot_sets]
    return np.unique(np.concatenate(parts))


def _away_from(thetas: np.ndarray, knots: np.ndarray) -> np.ndarray:
    if len(knots) == 0:
        return np.ones(len(thetas), dtype=bool)
    dist = np.min(np.abs(thetas[:, None] - np.asarray(knots)[None, :]), axis=1)
    return dist > KNOT_WINDOW


@dataclass(frozen=True)
class _Samples:
    """Constraint slacks on a shared theta grid; derivative rows skip knot windows."""

    th: np.ndarray
    zt: np.ndarray
    row: np.ndarray
    boundary: float
    dual_at: np.ndarray
    dual_row: np.ndarray


def _primal_slacks(spec, z: PrimalFunction, thetas, h):
    zt = z(thetas)
    row = spec.B(thetas) * zt + running_integral(spec.D, z.z, thetas, "lower", h) - spec.C(thetas)
    boundary = float(z(np.array([1.0]))[0]) + integrate_product([z.z], spec.F, h) - spec.L
    return zt, row, boundary


def _dual_slack(spec, dual: DualTriple, thetas, h):
    upper = running_integral(lambda t, s: spec.D(s, t), dual.w, thetas, "upper", h)
    lhs = spec.B(thetas) * dual.w(thetas) + upper + spec.F(thetas) * dual.gamma + dual.y.derivative(thetas)
    return spec.A(thetas) - lhs


def _primal_report(spec, z: PrimalFunction, th, zt, row, boundary, tol) -> CheckReport:
    smooth = _away_from(th, z.breakpoints)
    rising = np.concatenate([z.derivative(th[smooth]), z.z.jumps()])
    rising_at = np.concatenate([th[smooth], z.breakpoints])
    z0 = float(z(np.array([0.0]))[0])
    fams = (
        FamilyResult("initial", abs(z0 - spec.K), 0.0, abs(z0 - spec.K) <= tol),
        _worst("monotone", rising, rising_at, tol),
        _worst("row", -row, th, tol),
        FamilyResult("boundary", -boundary + 0.0, 1.0, -boundary <= tol),
        _worst("nonnegative", -zt, th, tol),
    )
    return CheckReport("primal", tol, fams)


def _dual_report(dual: DualTriple, th, dual_at, dual_row, tol) -> CheckReport:
    y1 = float(dual.y(np.array([1.0]))[0])
    neg = np.maximum(-dual.w(th), -dual.y(th))
    fams = (
        _worst("row", -dual_row, dual_at, tol),
        FamilyResult("terminal", dual.gamma - y1, 1.0, dual.gamma - y1 <= tol),
        _worst("nonnegative", np.append(neg, -dual.gamma), np.append(th, 1.0), tol),
    )
    return CheckReport("dual", tol, fams)


def _cs_report(z: PrimalFunction, dual: DualTriple, s: _Samples, tol) -> CheckReport:
    th = s.th
    slope_ok = _away_from(th, np.union1d(z.breakpoints, dual.y.interior_knots))
    dual_ok = _away_from(th, dual.y.interior_knots)
    terminal = (dual.gamma - float(dual.y(np.array([1.0]))[0])) * float(z(np.array([1.0]))[0])
    fams = (
        _worst("slope_times_y", np.abs(z.derivative(th[slope_ok]) * dual.y(th[slope_ok])), th[slope_ok], tol),
        _worst("row_slack_times_w", np.abs(s.row * dual.w(th)), th, tol),
        FamilyResult("boundary_slack_times_gamma", abs(s.boundary * dual.gamma), 1.0,
                     abs(s.boundary * dual.gamma) <= tol),
        _worst("dual_slack_times_z", np.abs(s.dual_row * s.zt[dual_ok]), s.dual_at, tol),
        FamilyResult("terminal_times_z", abs(terminal), 1.0, abs(terminal) <= tol),
    )
    return CheckReport("complementary_slackness", tol, fams)


def _pair_samples(spec, z: PrimalFunction, dual: DualTriple, grid: int, h: float) -> _Samples:
    spec.validate()
    th = _samples(grid, z.z.knots, dual.w.knots, dual.y.knots)
    zt, row, boundary = _primal_slacks(spec, z, th, h)
    dual_at = th[_away_from(th, dual.y.interior_knots)]
    return _Samples(th, zt, row, boundary, dual_at, _dual_slack(spec, dual, dual_at, h))


def check_primal_feasibility(
    spec: ContinuousLpSpec, z: PrimalFunction, grid: int = DEFAULT_GRID, tol: float = DEFAULT_TOL,
    h: float = DEFAULT_STEP,
) -> CheckReport:
    spec.validate()
    th = _samples(grid, z.z.knots)
    return _primal_report(spec, z, th, *_primal_slacks(spec, z, th, h), tol)


def check_dual_feasibility(
    spec: ContinuousLpSpec, dual: DualTriple, grid: int = DEFAULT_GRID, tol: float = DEFAULT_TOL,
    h: float = DEFAULT_STEP,
) -> CheckReport:
    spec.validate()
    th = _samples(grid, dual.w.knots, dual.y.knots)
    dual_at = th[_away_from(th, dual.y.interior_knots)]
    return _dual_report(dual, th, dual_at, _dual_slack(spec, dual, dual_at, h), tol)


def primal_objective(spec: ContinuousLpSpec, z: PrimalFunction, h: float = DEFAULT_STEP) -> float:
    return integrate_product([z.z], spec.A, h)


def dual_objective(spec: ContinuousLpSpec, dual: DualTriple, h: float = DEFAULT_STEP) -> float:
    y0 = float(dual.y(np.array([0.0]))[0])
    return integrate_product([dual.w], spec.C, h) + spec.L * dual.gamma - spec.K * y0


def _require_feasible(*reports: CheckReport) -> None:
    for report in reports:
        if not report.ok:
            failed = ", ".join(f.family for f in report.families if not f.passed)
            raise InfeasibleError(f"{report.kind} infeasible: {failed}")


def duality_gap(
    spec: ContinuousLpSpec, z: PrimalFunction, dual: DualTriple, grid: int = DEFAULT_GRID,
    tol: float = DEFAULT_TOL, h: float = DEFAULT_STEP,
) -> float:
    """``p(z) - d(w, y, gamma)`` after both sides pass their feasibility checks."""
    _require_feasible(check_primal_feasibility(spec, z, grid, tol, h),
                      check_dual_feasibility(spec, dual, grid, tol, h))
    return primal_objective(spec, z, h) - dual_objective(spec, dual, h)


def check_complementary_slackness(
    spec: ContinuousLpSpec, z: PrimalFunction, dual: DualTriple, grid: int = DEFAULT_GRID,
    tol: float = DEFAULT_TOL, h: float = DEFAULT_STEP,
) -> CheckReport:
    return _cs_report(z, dual, _pair_samples(spec, z, dual, grid, h), tol)


@dataclass(frozen=True)
class PairVerification:
    primal: CheckReport
    dual: CheckReport
    slackness: CheckReport
    primal_value: float
    dual_value: float

    @property
    def gap(self) -> float:
        return self.primal_value - self.dual_value

    def ok(self, gap_tol: float = DEFAULT_TOL) -> bool:
        return self.primal.ok and self.dual.ok and self.slackness.ok and abs(self.gap) <= gap_tol

    def to_csv(self) -> str:
        body = "".join(r.to_csv(header=False) for r in (self.primal, self.dual, self.slackness))
        gap_ok = abs(self.gap) <= self.primal.tol
        return ("check,family,max_violation,theta,status\n" + body
                + f"duality,gap,{self.gap:.6e},,{'pass' if gap_ok else 'fail'}\n")


def verify_pair(
    spec: ContinuousLpSpec, z: PrimalFunction, dual: DualTriple, grid: int = DEFAULT_GRID,
    tol: float = DEFAULT_TOL, h: float = DEFAULT_STEP,
) -> PairVerification:
    """Feasibility of both sides, complementary slackness and both objectives
    from a single evaluation of the constraint slacks."""
    s = _pair_samples(spec, z, dual, grid, h)
    return PairVerification(
        _primal_report(spec, z, s.th, s.zt, s.row, s.boundary, tol),
        _dual_report(dual, s.th, s.dual_at, s.dual_row, tol),
        _cs_report(z, dual, s, tol),
        primal_objective(spec, z, h),
        dual_objective(spec, dual, h),
    )


def interchange_sides(
    spec: ContinuousLpSpec, z: PrimalFunction, dual: DualTriple, h: float = DEFAULT_STEP
) -> tuple[float, float]:
    """Both orders of the double integral of ``D(t, s) z(s) w(t)`` over ``s <= t``."""
    inner_lower = Piecewise(
        dual.w.knots,
        tuple((lambda t, f=f: f(t) * running_integral(spec.D, z.z, t, "lower", h)) for f in dual.w.pieces),
        dual.w.slopes,
    )
    inner_upper = Piecewise(
        z.z.knots,
        tuple((lambda t, f=f: f(t) * running_integral(lambda a, b: spec.D(b, a), dual.w, t, "upper", h))
              for f in z.z.pieces),
        z.z.slopes,
    )
    return integrate_product([inner_lower], h=h), integrate_product([inner_upper], h=h)


def central_difference(f: Callable[[np.ndarray], np.ndarray], thetas, step: float = 1e-6) -> np.ndarray:
    thetas = np.asarray(thetas, dtype=float)
    return (f(thetas + step) - f(thetas - step)) / (2.0 * step)
