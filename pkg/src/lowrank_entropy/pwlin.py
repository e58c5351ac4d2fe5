"""Piecewise-constant and continuous piecewise-linear functions on the line.

Both types are immutable value objects backed by numpy arrays. P1 functions
extend by clamping to their end values, P0 functions are right-continuous
with explicit one-sided queries.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidEps, NotMonotone, OutOfRange

MONOTONE_RTOL = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"empty interval ({self.lo}, {self.hi})")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x, tol: float = 0.0):
        x = np.asarray(x, dtype=float)
        return (x >= self.lo - tol) & (x <= self.hi + tol)


@dataclass(frozen=True, eq=False)
class PiecewiseConstantFn:
    """Values on the open pieces cut by ``breakpoints``; len(values) = m + 1."""

    breakpoints: np.ndarray
    values: np.ndarray

    kind = "p0"

    def __post_init__(self):
        b = _frozen(self.breakpoints).reshape(-1)
        v = _frozen(self.values).reshape(-1)
        if v.size != b.size + 1:
            raise ValueError("need len(values) == len(breakpoints) + 1")
        if b.size and np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(v))):
            raise ValueError("non-finite breakpoint or value")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    def __call__(self, x, side: str = "right"):
        return evaluate(self, x, side)

    def jumps(self) -> np.ndarray:
        return np.diff(self.values)

    @property
    def knots(self) -> np.ndarray:
        return self.breakpoints


@dataclass(frozen=True, eq=False)
class PiecewiseLinearFn:
    knots: np.ndarray
    values: np.ndarray

    kind = "p1"

    def __post_init__(self):
        k = _frozen(self.knots).reshape(-1)
        v = _frozen(self.values).reshape(-1)
        if k.size != v.size or k.size == 0:
            raise ValueError("knots and values must be non-empty and of equal length")
        if np.any(np.diff(k) <= 0):
            raise ValueError("knots must be strictly increasing")
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(v))):
            raise ValueError("non-finite knot or value")
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    def __call__(self, x, side: str = "point"):
        return evaluate(self, x, side)

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.knots)


PiecewiseFn = Union[PiecewiseConstantFn, PiecewiseLinearFn]


def evaluate(f: PiecewiseFn, x, side: str = "point"):
    """Evaluate ``f`` at ``x``; ``side`` selects one-sided limits for P0."""
    if side not in ("left", "right", "point"):
        raise ValueError(f"unknown side {side!r}")
    xa = np.asarray(x, dtype=float)
    if isinstance(f, PiecewiseLinearFn):
        out = np.interp(xa, f.knots, f.values)
    else:
        how = "left" if side == "left" else "right"
        out = f.values[np.searchsorted(f.breakpoints, xa, side=how)]
    return float(out) if np.ndim(out) == 0 else out


def check_nondecreasing(values: np.ndarray, rtol: float = MONOTONE_RTOL) -> None:
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    if values.size > 1 and np.min(np.diff(values)) < -rtol * scale:
        raise NotMonotone("function decreases beyond tolerance")


def left_inverse(g: PiecewiseLinearFn, y, tol: float = 1e-12):
    """g+(y) = inf{x : g(x) = y} over the knot range of a nondecreasing P1 g."""
    check_nondecreasing(g.values)
    vals = np.maximum.accumulate(g.values)
    ya = np.asarray(y, dtype=float)
    scale = max(1.0, float(np.max(np.abs(vals))))
    lo, hi = vals[0], vals[-1]
    if np.any(ya < lo - tol * scale) or np.any(ya > hi + tol * scale):
        raise OutOfRange("value outside the range of g")
    yc = np.clip(ya, lo, hi)
    j = np.searchsorted(vals, yc, side="left")
    j = np.clip(j, 0, vals.size - 1)
    jm = np.maximum(j - 1, 0)
    k0, k1 = g.knots[jm], g.knots[j]
    v0, v1 = vals[jm], vals[j]
    dv = np.where(v1 > v0, v1 - v0, 1.0)
    x = np.where(j == 0, g.knots[0], k0 + (yc - v0) * (k1 - k0) / dv)
    return float(x) if np.ndim(x) == 0 else x


def total_variation(f: PiecewiseFn) -> float:
    return float(np.sum(np.abs(np.diff(f.values))))


def positive_variation(f: PiecewiseFn) -> float:
    return float(np.sum(np.maximum(np.diff(f.values), 0.0)))


def relu(x):
    return np.maximum(x, 0.0)


def rho(x):
    """Unit step with rho(0) = 0."""
    return (np.asarray(x, dtype=float) > 0).astype(float)


def rho_eps(eps: float, x):
    """(1/eps)[relu(x + eps/2) - relu(x - eps/2)], written as a clipped ramp."""
    if not eps > 0:
        raise InvalidEps(f"eps must be positive, got {eps}")
    out = np.clip(np.asarray(x, dtype=float) / eps + 0.5, 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def rho_eps_fn(eps: float, shift: float = 0.0) -> PiecewiseLinearFn:
    if not eps > 0:
        raise InvalidEps(f"eps must be positive, got {eps}")
    return PiecewiseLinearFn([shift - eps / 2, shift + eps / 2], [0.0, 1.0])


def step_fn(shift: float = 0.0) -> PiecewiseConstantFn:
    return PiecewiseConstantFn([shift], [0.0, 1.0])


def _abs_linear_integral(da, db, width):
    """Integral over [0, width] of |linear function with end values da, db|."""
    da = np.asarray(da, dtype=float)
    db = np.asarray(db, dtype=float)
    same = da * db >= 0
    s = np.abs(da) + np.abs(db)
    cross = np.where(s > 0, (da * da + db * db) / (2 * np.where(s > 0, s, 1.0)), 0.0)
    return width * np.where(same, 0.5 * s, cross)


def _end_values(f: PiecewiseFn, a: np.ndarray, b: np.ndarray):
    if isinstance(f, PiecewiseLinearFn):
        return np.interp(a, f.knots, f.values), np.interp(b, f.knots, f.values)
    mid = f(0.5 * (a + b))
    return mid, mid


def merged_knots(fns, dom: Interval) -> np.ndarray:
    pts = [np.array([dom.lo, dom.hi])]
    for f in fns:
        k = f.knots
        pts.append(k[(k > dom.lo) & (k < dom.hi)])
    return np.unique(np.concatenate(pts))


def l1_distance(f: PiecewiseFn, g: PiecewiseFn, dom: Interval) -> float:
    """Exact L1 distance on ``dom``: the difference is affine between merged knots."""
    x = merged_knots([f, g], dom)
    a, b = x[:-1], x[1:]
    fa, fb = _end_values(f, a, b)
    ga, gb = _end_values(g, a, b)
    return float(np.sum(_abs_linear_integral(fa - ga, fb - gb, b - a)))


def linf_distance(f: PiecewiseFn, g: PiecewiseFn, dom: Interval, sample_n: int = 0) -> float:
    x = merged_knots([f, g], dom)
    probes = [x]
    if sample_n > 0:
        probes.append(np.linspace(dom.lo, dom.hi, sample_n + 1)[:-1] + dom.length / (2 * sample_n))
    p = np.concatenate(probes)
    best = 0.0
    for side in ("left", "right"):
        best = max(best, float(np.max(np.abs(evaluate(f, p, side) - evaluate(g, p, side)))))
    return best


def p0_from_steps(c0: float, locations, increments) -> PiecewiseConstantFn:
    """c0 + sum_k c_k rho(x - x_k) as a P0 function (coincident locations merge)."""
    loc = np.asarray(locations, dtype=float)
    inc = np.asarray(increments, dtype=float)
    order = np.argsort(loc, kind="stable")
    loc, inc = loc[order], inc[order]
    uniq, idx = np.unique(loc, return_inverse=True)
    summed = np.zeros(uniq.size)
    np.add.at(summed, idx, inc)
    values = c0 + np.concatenate([[0.0], np.cumsum(summed)])
    return PiecewiseConstantFn(uniq, values)


def p0_cell_average(func, dom: Interval, n: int, quad_pts: int = 8) -> PiecewiseConstantFn:
    """Sample a callable into ``n`` uniform cells by Gauss-Legendre cell averages."""
    edges = np.linspace(dom.lo, dom.hi, n + 1)
    nodes, weights = np.polynomial.legendre.leggauss(quad_pts)
    h = edges[1] - edges[0]
    centers = 0.5 * (edges[:-1] + edges[1:])
    pts = centers[:, None] + 0.5 * h * nodes[None, :]
    avg = 0.5 * np.sum(np.asarray(func(pts)) * weights[None, :], axis=1)
    values = np.concatenate([[0.0], avg, [0.0]])
    return PiecewiseConstantFn(edges, values)


def to_json(f: PiecewiseFn) -> dict:
    return {"knots": f.knots.tolist(), "values": f.values.tolist(), "kind": f.kind}


def from_json(d: dict) -> PiecewiseFn:
    if d["kind"] == "p0":
        return PiecewiseConstantFn(d["knots"], d["values"])
    if d["kind"] == "p1":
        return PiecewiseLinearFn(d["knots"], d["values"])
    raise ValueError(f"unknown kind {d['kind']!r}")
