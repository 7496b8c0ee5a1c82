"""The finite factor-revealing LP over x_1..x_n and its solution.

Rows, in order: ``eq1`` (x_1 = 1), ``mono_t`` (x_{t-1} - x_t >= 0),
``evol_t`` ((1 - (t-1)/n) x_t + (2/n) sum_{i<t} x_i >= 1) for t = 2..n, and
``bound`` (x_n + (3/(2n)) sum_t x_t >= 1). The objective minimises the mean
of the x_t. Coefficients are stored as exact fractions.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal, Optional

import numpy as np

from .simplex import Sense, solve_lp

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
EXACT_LIMIT = 30


@dataclass(frozen=True)
class Row:
    name: str
    coeffs: tuple[Fraction, ...]
    sense: Sense
    rhs: Fraction


@dataclass(frozen=True)
class LpModel:
    n: int
    objective: tuple[Fraction, ...]
    rows: tuple[Row, ...]

    def row(self, name: str) -> Row:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def matrix(self) -> tuple[list, list, list]:
        return [r.coeffs for r in self.rows], [r.sense for r in self.rows], [r.rhs for r in self.rows]

    def residuals(self, x) -> np.ndarray:
        """Per-row violation (positive means violated), scaled by 1 + |rhs|."""
        xf = np.asarray([float(v) for v in x])
        out = np.empty(len(self.rows))
        for k, r in enumerate(self.rows):
            lhs = float(np.dot([float(c) for c in r.coeffs], xf))
            rhs = float(r.rhs)
            if r.sense == ">=":
                v = rhs - lhs
            elif r.sense == "<=":
                v = lhs - rhs
            else:
                v = abs(lhs - rhs)
            out[k] = v / (1.0 + abs(rhs))
        return out


@dataclass(frozen=True)
class LpSolution:
    status: Literal["optimal", "infeasible", "unbounded"]
    objective: Optional[float]
    x: Optional[tuple]
    duals: Optional[tuple] = None
    iterations: int = 0
    exact: bool = False


def build_lp(n: int) -> LpModel:
    if n < 2:
        raise ValueError(f"LP(n) needs n >= 2, got {n}")
    zero, one = Fraction(0), Fraction(1)
    rows: list[Row] = []

    def vec(entries: dict[int, Fraction]) -> tuple[Fraction, ...]:
        v = [zero] * n
        for i, c in entries.items():
            v[i] += c
        return tuple(v)

    rows.append(Row("eq1", vec({0: one}), "=", one))
    for t in range(2, n + 1):
        rows.append(Row(f"mono_{t}", vec({t - 2: one, t - 1: -one}), ">=", zero))
    for t in range(2, n + 1):
        coeffs = {i: Fraction(2, n) for i in range(t - 1)}
        coeffs[t - 1] = one - Fraction(t - 1, n)
        rows.append(Row(f"evol_{t}", vec(coeffs), ">=", one))
    bound = {i: Fraction(3, 2 * n) for i in range(n)}
    bound[n - 1] += one
    rows.append(Row("bound", vec(bound), ">=", one))
    return LpModel(n, tuple(Fraction(1, n) for _ in range(n)), tuple(rows))


def solve(model: LpModel, exact: bool = False) -> LpSolution:
    """Optimal basic solution of ``model``; ``exact`` solves over the rationals."""
    if exact and model.n > EXACT_LIMIT:
        raise ValueError(f"exact mode is limited to n <= {EXACT_LIMIT}")
    A, senses, b = model.matrix()
    res = solve_lp(A, senses, b, model.objective, exact=exact, tol=OPT_TOL)
    if res.status != "optimal":
        return LpSolution(res.status, None, None, iterations=res.iterations, exact=exact)
    if exact:
        x = tuple(Fraction(v) for v in res.x)
        return LpSolution("optimal", Fraction(res.objective), x,
                          tuple(Fraction(v) for v in res.duals), res.iterations, True)
    x = tuple(float(v) for v in res.x)
    return LpSolution("optimal", float(res.objective), x,
                      tuple(float(v) for v in res.duals), res.iterations, False)


def lp_duality_gap(model: LpModel, sol: LpSolution) -> float:
    """|c.x - b.y| plus the largest dual infeasibility of the stored certificate."""
    A, senses, b = model.matrix()
    y = np.array([float(v) for v in sol.duals])
    Af = np.array([[float(c) for c in row] for row in A])
    c = np.array([float(v) for v in model.objective])
    primal = float(c @ np.array([float(v) for v in sol.x]))
    dual = float(np.array([float(v) for v in b]) @ y)
    reduced = c - Af.T @ y
    sign_viol = max(
        [max(0.0, -yi) for yi, s in zip(y, senses) if s == ">="]
        + [max(0.0, yi) for yi, s in zip(y, senses) if s == "<="]
        + [0.0]
    )
    return abs(primal - dual) + max(0.0, -float(reduced.min())) + sign_viol


def _solve_value(n: int) -> tuple[int, float]:
    sol = solve(build_lp(n))
    if sol.status != "optimal":
        raise RuntimeError(f"LP({n}) reported {sol.status}")
    return n, sol.objective


@dataclass(frozen=True)
class SeriesRow:
    n: int
    value: float
    running_inf: float


def lp_value_series(ns: Iterable[int], workers: int = 1) -> list[SeriesRow]:
    ns = list(ns)
    if workers > 1 and len(ns) > 1:
        with ProcessPoolExecutor(workers) as pool:
            values = list(pool.map(_solve_value, ns))
    else:
        values = [_solve_value(n) for n in ns]
    out = []
    inf = float("inf")
    for n, v in values:
        inf = min(inf, v)
        out.append(SeriesRow(n, v, inf))
    return out


def to_lp_format(model: LpModel) -> str:
    """CPLEX LP text with columns x1..xn and the row names above."""

    def term_list(coeffs) -> str:
        parts = []
        for i, c in enumerate(coeffs):
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            parts.append(f"{sign} {float(abs(c))!r} x{i + 1}")
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else text

    lines = [f"\\ factor-revealing LP, n = {model.n}", "Minimize", f" obj: {term_list(model.objective)}",
             "Subject To"]
    for r in model.rows:
        lines.append(f" {r.name}: {term_list(r.coeffs)} {r.sense} {float(r.rhs)!r}")
    lines.append("Bounds")
    lines += [f" x{i + 1} >= 0" for i in range(model.n)]
    lines.append("End")
    return "\n".join(lines) + "\n"
