"""Dense two-phase tableau simplex with Bland's least-index rule.

Works over float64 (with tolerances) or exactly over ``fractions.Fraction``
(numpy object arrays, zero tolerance). Variables are non-negative. The final
basis yields a dual vector, so callers can check strong duality themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

Sense = Literal["<=", ">=", "="]
Status = Literal["optimal", "infeasible", "unbounded"]


class SimplexError(RuntimeError):
    pass


@dataclass(frozen=True)
class StandardForm:
    """``A x_ext = b`` with ``b >= 0``; ``x_ext`` = originals, slacks, artificials."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    n_orig: int
    artificial: tuple[int, ...]
    initial_basis: tuple[int, ...]
    row_sign: tuple[int, ...]


@dataclass(frozen=True)
class SimplexResult:
    status: Status
    x: np.ndarray
    objective: object
    duals: np.ndarray
    iterations: int


def to_standard_form(
    A: Sequence[Sequence], senses: Sequence[Sense], b: Sequence, c: Sequence, exact: bool
) -> StandardForm:
    dtype = object if exact else float
    conv = Fraction if exact else float
    A = np.array([[conv(v) for v in row] for row in A], dtype=dtype)
    b = np.array([conv(v) for v in b], dtype=dtype)
    m, n = A.shape
    signs = []
    senses = list(senses)
    for i in range(m):
        sign = 1
        if b[i] < 0 or (b[i] == 0 and senses[i] == ">="):
            # flipping keeps b >= 0 and lets zero-rhs >= rows start from a slack
            sign = -1
            A[i] = -A[i]
            b[i] = -b[i]
            senses[i] = {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]
        signs.append(sign)
    n_slack = sum(1 for s in senses if s != "=")
    n_art = sum(1 for s in senses if s != "<=")
    zero, one = conv(0), conv(1)
    ext = np.full((m, n + n_slack + n_art), zero, dtype=dtype)
    ext[:, :n] = A
    basis = []
    artificial = []
    col = n
    art_col = n + n_slack
    for i, s in enumerate(senses):
        if s == "<=":
            ext[i, col] = one
            basis.append(col)
            col += 1
            continue
        if s == ">=":
            ext[i, col] = -one
            col += 1
        ext[i, art_col] = one
        basis.append(art_col)
        artificial.append(art_col)
        art_col += 1
    cost = np.full(ext.shape[1], zero, dtype=dtype)
    cost[:n] = [conv(v) for v in c]
    return StandardForm(ext, b, cost, n, tuple(artificial), tuple(basis), tuple(signs))


class _Tableau:
    def __init__(self, sf: StandardForm, exact: bool, tol: float):
        self.T = np.concatenate([sf.A, sf.b[:, None]], axis=1)
        self.basis = list(sf.initial_basis)
        self.tol = 0 if exact else tol
        self.iterations = 0

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        cb = cost[self.basis]
        return cost - cb @ self.T[:, :-1]

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        T[r] = T[r] / T[r, j]
        colj = T[:, j].copy()
        colj[r] = 0
        T -= np.outer(colj, T[r])
        self.basis[r] = j
        self.iterations += 1

    def run(self, cost: np.ndarray, allowed: np.ndarray, max_iter: int) -> Status:
        tol = self.tol
        while True:
            if self.iterations >= max_iter:
                raise SimplexError(f"iteration limit {max_iter} reached")
            d = self.reduced_costs(cost)
            d[self.basis] = 0
            candidates = np.nonzero(allowed & (d < -tol))[0]
            if len(candidates) == 0:
                return "optimal"
            j = int(candidates[0])
            col = self.T[:, j]
            rows = np.nonzero(col > tol)[0]
            if len(rows) == 0:
                return "unbounded"
            ratios = [self.T[i, -1] / col[i] for i in rows]
            best = min(ratios)
            if tol:
                ties = [i for i, q in zip(rows, ratios) if q <= best + tol * (1 + abs(best))]
            else:
                ties = [i for i, q in zip(rows, ratios) if q == best]
            r = min(ties, key=lambda i: self.basis[i])
            self.pivot(int(r), j)


def solve_standard(
    sf: StandardForm, exact: bool = False, tol: float = 1e-9, max_iter: int = 200_000
) -> SimplexResult:
    tab = _Tableau(sf, exact, tol)
    ncols = sf.A.shape[1]
    zero = Fraction(0) if exact else 0.0
    is_art = np.zeros(ncols, dtype=bool)
    is_art[list(sf.artificial)] = True

    if sf.artificial:
        phase1 = np.full(ncols, zero, dtype=sf.c.dtype)
        phase1[is_art] = Fraction(1) if exact else 1.0
        tab.run(phase1, np.ones(ncols, dtype=bool), max_iter)
        infeas = phase1[tab.basis] @ tab.T[:, -1]
        if infeas > (0 if exact else tol * max(1.0, float(np.max(np.abs(sf.b))))):
            return SimplexResult("infeasible", None, None, None, tab.iterations)
        # drive zero-valued artificials out; rows with no other entry are redundant
        for r, bvar in enumerate(list(tab.basis)):
            if not is_art[bvar]:
                continue
            row = tab.T[r, :-1]
            cand = [j for j in range(ncols) if not is_art[j] and abs(row[j]) > tab.tol]
            if cand:
                tab.pivot(r, cand[0])

    status = tab.run(sf.c, ~is_art, max_iter)
    if status == "unbounded":
        return SimplexResult("unbounded", None, None, None, tab.iterations)
    xext = np.full(ncols, zero, dtype=sf.c.dtype)
    for r, bvar in enumerate(tab.basis):
        xext[bvar] = tab.T[r, -1]
    # columns of the initial basis hold B^-1; the dual is c_B B^-1
    binv = tab.T[:, list(sf.initial_basis)]
    cb = np.array([zero if is_art[bv] else sf.c[bv] for bv in tab.basis], dtype=sf.c.dtype)
    y = cb @ binv
    y = np.array([s * v for s, v in zip(sf.row_sign, y)], dtype=sf.c.dtype)
    x = xext[: sf.n_orig]
    return SimplexResult("optimal", x, sf.c[: sf.n_orig] @ x, y, tab.iterations)


def solve_lp(
    A: Sequence[Sequence],
    senses: Sequence[Sense],
    b: Sequence,
    c: Sequence,
    exact: bool = False,
    tol: float = 1e-9,
) -> SimplexResult:
    """Minimise ``c x`` subject to ``A x (senses) b`` and ``x >= 0``."""
    sf = to_standard_form(A, senses, b, c, exact)
    return solve_standard(sf, exact, tol)
