"""Exact entropy solutions of u_t + F(u)_x = 0 for piecewise-constant data.

The solution is read off the Lax-Oleinik minimisation
    min_y  U0(y) + t F*((x - y) / t),      U0' = u0,
which for piecewise-constant u0 is exact over a finite candidate set: the
breakpoints of u0 plus, on each piece with value c, the point x - t F'(c)
clipped to that piece.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import HorizonExceeded
from .flux import ConvexFlux, fprime_inverse, legendre
from .pwlin import Interval, PiecewiseConstantFn, PiecewiseLinearFn, positive_variation


@dataclass(frozen=True)
class MinimizerSet:
    y_minus: np.ndarray
    y_plus: np.ndarray
    value: np.ndarray


@dataclass(frozen=True, eq=False)
class LaxOleinikOracle:
    u0: PiecewiseConstantFn
    flux: ConvexFlux
    T: float
    dom: Interval = field(default_factory=lambda: Interval(0.0, 1.0))
    U0: PiecewiseLinearFn = field(init=False)

    def __post_init__(self):
        b, c = self.u0.breakpoints, self.u0.values
        if b.size == 0:
            prim = PiecewiseLinearFn([0.0], [0.0])
        else:
            inner = np.concatenate([[0.0], np.cumsum(c[1:-1] * np.diff(b))])
            # shift so that U0(0) = 0
            at0 = np.interp(0.0, b, inner) if b[0] <= 0.0 <= b[-1] else (
                inner[0] + c[0] * (0.0 - b[0]) if 0.0 < b[0] else inner[-1] + c[-1] * (0.0 - b[-1]))
            prim = PiecewiseLinearFn(b, inner - at0)
        object.__setattr__(self, "U0", prim)

    @property
    def ext_length(self) -> float:
        return self.dom.length + positive_variation(self.u0)

    @property
    def tol_y(self) -> float:
        return 1e-9 * self.ext_length

    def _check_t(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t > self.T * (1 + 1e-12)):
            raise HorizonExceeded(f"t exceeds horizon T={self.T}")
        if np.any(t <= 0):
            raise ValueError("minimisation needs t > 0")
        return t

    def _U0(self, y, piece):
        """U0 at y known to lie in piece index ``piece`` (0..m)."""
        b, c = self.u0.breakpoints, self.u0.values
        if b.size == 0:
            return c[0] * y
        anchor = np.clip(piece - 1, 0, b.size - 1)
        anchor = np.where(piece == 0, 0, anchor)
        return self.U0.values[anchor] + c[piece] * (y - b[anchor])

    def minimize(self, x, t) -> MinimizerSet:
        t = self._check_t(t)
        x = np.asarray(x, dtype=float)
        x, t = np.broadcast_arrays(x, t)
        b, c = self.u0.breakpoints, self.u0.values
        m = b.size
        X, Tt = x[..., None], t[..., None]
        lo = np.concatenate([[-np.inf], b])
        hi = np.concatenate([b, [np.inf]])
        stat = np.clip(X - Tt * self.flux.dF(c), lo, hi)
        pieces = np.arange(m + 1)
        ys = [stat]
        ps = [np.broadcast_to(pieces, stat.shape)]
        if m:
            ys.append(np.broadcast_to(b, x.shape + (m,)))
            ps.append(np.broadcast_to(np.arange(1, m + 1), x.shape + (m,)))
        y = np.concatenate(ys, axis=-1)
        piece = np.concatenate(ps, axis=-1)
        slope = (X - y) / Tt
        ok = self.flux.in_speed_range(slope)
        safe = np.where(ok, slope, self.flux.dF(c[0]) if np.isfinite(c[0]) else 0.0)
        J = self._U0(y, piece) + Tt * np.asarray(legendre(self.flux, safe))
        J = np.where(ok, J, np.inf)
        val = np.min(J, axis=-1)
        tol = 1e-12 * (1.0 + np.abs(val))
        near = J <= (val + tol)[..., None]
        y_minus = np.min(np.where(near, y, np.inf), axis=-1)
        y_plus = np.max(np.where(near, y, -np.inf), axis=-1)
        return MinimizerSet(y_minus, y_plus, val)

    def solution(self, x, t, side: str = "left"):
        """Entropy solution; side='left' gives u(x-, t), 'right' gives u(x+, t)."""
        if side not in ("left", "right"):
            raise ValueError(f"unknown side {side!r}")
        t_arr = np.asarray(t, dtype=float)
        x_arr = np.asarray(x, dtype=float)
        if np.any(t_arr > self.T * (1 + 1e-12)):
            raise HorizonExceeded(f"t exceeds horizon T={self.T}")
        x_arr, t_arr = np.broadcast_arrays(x_arr, t_arr)
        out = np.empty(x_arr.shape)
        zero = t_arr <= 0
        if np.any(zero):
            out[zero] = self.u0(x_arr[zero], side=side)
        pos = ~zero
        if np.any(pos):
            ms = self.minimize(x_arr[pos], t_arr[pos])
            foot = ms.y_minus if side == "left" else ms.y_plus
            out[pos] = fprime_inverse(self.flux, (x_arr[pos] - foot) / t_arr[pos])
        return float(out) if out.ndim == 0 else out

    def alive(self, foot, speed, t):
        """True where the straight line from (foot, 0) with ``speed`` is a backward characteristic at t."""
        t = self._check_t(t)
        foot = np.asarray(foot, dtype=float)
        z0 = foot + t * np.asarray(speed, dtype=float)
        ms = self.minimize(z0, t)
        tol = self.tol_y
        res = (foot >= ms.y_minus - tol) & (foot <= ms.y_plus + tol)
        return bool(res) if np.ndim(res) == 0 else res

    def fan_edges(self, t: float) -> np.ndarray:
        b, c = self.u0.breakpoints, self.u0.values
        up = c[1:] > c[:-1]
        left = b[up] + t * self.flux.dF(c[:-1][up])
        right = b[up] + t * self.flux.dF(c[1:][up])
        return np.sort(np.concatenate([left, right]))

    def shock_positions(self, t: float, lo: float, hi: float, n: int = 2048,
                        tol: float = 1e-10) -> np.ndarray:
        """Discontinuities of u(., t) in [lo, hi], located from foot gaps alone."""
        if t <= 0:
            return self.u0.breakpoints[(self.u0.breakpoints >= lo) & (self.u0.breakpoints <= hi)]
        xs = np.linspace(lo, hi, n + 1)
        ms = self.minimize(xs, t)
        found = list(xs[ms.y_plus - ms.y_minus > tol])
        gap = ms.y_minus[1:] - ms.y_plus[:-1] - np.diff(xs)
        for j in np.nonzero(gap > tol)[0]:
            a, bb = xs[j], xs[j + 1]
            ya = ms.y_plus[j]
            for _ in range(80):
                mid = 0.5 * (a + bb)
                if mid <= a or mid >= bb:
                    break
                mm = self.minimize(mid, t)
                if mm.y_plus - mm.y_minus > tol:
                    a = bb = mid
                    break
                if mm.y_minus - ya - (mid - a) > tol:
                    bb = mid
                else:
                    a, ya = mid, float(mm.y_plus)
            found.append(0.5 * (a + bb))
        return np.unique(np.array(found, dtype=float))


def classical_solution(u0, flux: ConvexFlux, x, t, lo: float = 0.0, hi: float = 1.0,
                       iters: int = 80):
    """Pre-shock solution u0(y) with y + t F'(u0(y)) = x, by bisection on y.

    Points outside [lo + t F'(u0(lo)), hi + t F'(u0(hi))] take the boundary
    state, which for compactly supported data is the zero state moved rigidly.
    """
    x = np.asarray(x, dtype=float)
    x, t = np.broadcast_arrays(x, np.asarray(t, dtype=float))
    a = np.full(x.shape, lo)
    b = np.full(x.shape, hi)
    ga = a + t * flux.dF(u0(a))
    gb = b + t * flux.dF(u0(b))
    for _ in range(iters):
        mid = 0.5 * (a + b)
        g = mid + t * flux.dF(u0(mid))
        right = g < x
        a = np.where(right, mid, a)
        b = np.where(right, b, mid)
    y = 0.5 * (a + b)
    y = np.where(x <= ga, lo + (x - ga), np.where(x >= gb, hi + (x - gb), y))
    out = np.where((x <= ga) | (x >= gb), u0(np.clip(y, lo, hi)) * 0 + u0(np.where(x <= ga, lo, hi)), u0(y))
    return float(out) if out.ndim == 0 else out
