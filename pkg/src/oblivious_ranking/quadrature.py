"""Piecewise functions on [0, 1] and composite Simpson rules split at their knots.

A ``Piecewise`` function is given by knots ``0 = k_0 < ... < k_m = 1`` and one
smooth callable per segment. Point values follow the closed-on-the-right
convention: theta in ``(k_i, k_{i+1}]`` uses piece ``i`` and theta = 0 uses
piece 0. Quadrature evaluates each piece on its own closed segment, so jumps
at knots never leak into a neighboring segment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

Fn = Callable[[np.ndarray], np.ndarray]
Kernel = Callable[[np.ndarray, np.ndarray], np.ndarray]

DEFAULT_STEP = 1.0 / 4096
_CHUNK_CELLS = 1 << 21


def simpson_panels(length: float, h: float) -> int:
    """Smallest even panel count giving spacing <= h (at least 2)."""
    p = max(2, int(np.ceil(length / h - 1e-12)))
    return p + (p % 2)


def simpson_unit_weights(panels: int) -> np.ndarray:
    """Weights on ``linspace(0, 1, panels + 1)``; they sum to 1."""
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * panels)


def _broadcast(v, shape) -> np.ndarray:
    return np.broadcast_to(np.asarray(v, dtype=float), shape)


@dataclass(frozen=True)
class Piecewise:
    knots: tuple[float, ...]
    pieces: tuple[Fn, ...]
    slopes: tuple[Fn, ...]
    constants: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        k = np.asarray(self.knots)
        if k[0] != 0.0 or k[-1] != 1.0 or np.any(np.diff(k) <= 0):
            raise ValueError("knots must increase strictly from 0 to 1")
        if len(self.pieces) != len(k) - 1 or len(self.slopes) != len(k) - 1:
            raise ValueError("need one piece and one slope per segment")

    @classmethod
    def smooth(cls, f: Fn, df: Fn) -> "Piecewise":
        return cls((0.0, 1.0), (f,), (df,))

    @classmethod
    def step(cls, knots: Sequence[float], values: Sequence[float]) -> "Piecewise":
        vals = tuple(float(v) for v in values)
        zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))  # noqa: E731
        pieces = tuple((lambda t, c=c: np.full_like(np.asarray(t, dtype=float), c)) for c in vals)
        return cls(tuple(float(k) for k in knots), pieces, (zero,) * len(vals), vals)

    @property
    def knot_array(self) -> np.ndarray:
        return np.asarray(self.knots)

    @property
    def interior_knots(self) -> np.ndarray:
        return self.knot_array[1:-1]

    def piece_index(self, theta) -> np.ndarray:
        j = np.searchsorted(self.knot_array, np.asarray(theta, dtype=float), side="left") - 1
        return np.clip(j, 0, len(self.pieces) - 1)

    def eval_rows(self, j: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Evaluate piece ``j[r]`` at every entry of row ``r`` of ``x``."""
        x = np.asarray(x, dtype=float)
        j = np.asarray(j)
        if self.constants is not None:
            c = np.asarray(self.constants)[j]
            return np.broadcast_to(c.reshape(c.shape + (1,) * (x.ndim - j.ndim)), x.shape).copy()
        out = np.empty_like(x)
        for idx in np.unique(j):
            rows = j == idx
            out[rows] = _broadcast(self.pieces[idx](x[rows]), x[rows].shape)
        return out

    def _pointwise(self, fns, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        flat = theta.ravel()
        j = self.piece_index(flat)
        out = np.empty_like(flat)
        if fns is self.pieces and self.constants is not None:
            out[:] = np.asarray(self.constants)[j]
        else:
            for idx in np.unique(j):
                m = j == idx
                out[m] = _broadcast(fns[idx](flat[m]), flat[m].shape)
        return out.reshape(theta.shape)

    def __call__(self, theta) -> np.ndarray:
        return self._pointwise(self.pieces, theta)

    def derivative(self, theta) -> np.ndarray:
        return self._pointwise(self.slopes, theta)

    def jumps(self) -> np.ndarray:
        """Right limit minus left limit at each interior knot."""
        out = []
        for i, t in enumerate(self.interior_knots):
            left = float(_broadcast(self.pieces[i](np.array([t])), (1,))[0])
            right = float(_broadcast(self.pieces[i + 1](np.array([t])), (1,))[0])
            out.append(right - left)
        return np.asarray(out)

    def simpson_table(self, h: float = DEFAULT_STEP):
        """Concatenated Simpson nodes, weights, values and segment ids."""
        nodes, weights, values, ids = [], [], [], []
        k = self.knot_array
        for i in range(len(self.pieces)):
            lo, hi = k[i], k[i + 1]
            p = simpson_panels(hi - lo, h)
            x = np.linspace(lo, hi, p + 1)
            nodes.append(x)
            weights.append(simpson_unit_weights(p) * (hi - lo))
            values.append(_broadcast(self.pieces[i](x), x.shape))
            ids.append(np.full(p + 1, i))
        return (np.concatenate(nodes), np.concatenate(weights),
                np.concatenate(values), np.concatenate(ids))


def merge_knots(*fns: Piecewise) -> np.ndarray:
    return np.unique(np.concatenate([f.knot_array for f in fns]))


def integrate_product(
    fns: Sequence[Piecewise], weight: Optional[Fn] = None, h: float = DEFAULT_STEP
) -> float:
    """Simpson integral over [0, 1] of ``weight * prod(fns)``, split at all knots."""
    knots = merge_knots(*fns)
    total = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        p = simpson_panels(hi - lo, h)
        x = np.linspace(lo, hi, p + 1)
        mid = 0.5 * (lo + hi)
        vals = np.ones_like(x)
        for f in fns:
            j = f.piece_index(np.array([mid]))
            vals = vals * f.eval_rows(j, x[None, :])[0]
        if weight is not None:
            vals = vals * _broadcast(weight(x), x.shape)
        total += float(simpson_unit_weights(p) @ vals) * (hi - lo)
    return total


def running_integral(
    kernel: Kernel, f: Piecewise, thetas, side: str = "lower", h: float = DEFAULT_STEP
) -> np.ndarray:
    """For each theta, ``int_0^theta`` (side="lower") or ``int_theta^1``
    (side="upper") of ``kernel(theta, lam) * f(lam)`` d lam.

    Whole segments on the integration side share one precomputed Simpson
    table; the segment containing theta is integrated separately.
    """
    if side not in ("lower", "upper"):
        raise ValueError("side must be 'lower' or 'upper'")
    shape = np.shape(thetas)
    thetas = np.asarray(thetas, dtype=float).ravel()
    knots = f.knot_array
    nodes, weights, values, ids = f.simpson_table(h)
    wf = weights * values
    j = f.piece_index(thetas)
    p = simpson_panels(float(np.max(np.diff(knots))), h)
    unit = np.linspace(0.0, 1.0, p + 1)
    uw = simpson_unit_weights(p)
    out = np.empty_like(thetas)
    chunk = max(1, _CHUNK_CELLS // (len(nodes) + p + 1))
    for start in range(0, len(thetas), chunk):
        th = thetas[start : start + chunk]
        jc = j[start : start + chunk]
        if side == "lower":
            mask = ids[None, :] < jc[:, None]
            lo, hi = knots[jc], th
        else:
            mask = ids[None, :] > jc[:, None]
            lo, hi = th, knots[jc + 1]
        kv = _broadcast(kernel(th[:, None], nodes[None, :]), mask.shape)
        full = np.where(mask, kv * wf[None, :], 0.0).sum(axis=1)
        length = hi - lo
        x = lo[:, None] + length[:, None] * unit[None, :]
        kp = _broadcast(kernel(th[:, None], x), x.shape)
        part = (kp * f.eval_rows(jc, x)) @ uw * length
        out[start : start + chunk] = full + part
    return out.reshape(shape)
