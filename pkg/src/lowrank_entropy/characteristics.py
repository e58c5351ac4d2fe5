"""Characteristics on the extended domain, the shock-time function, and
evaluation of the entropy solution through them.

Every upward jump of u0 of size eps_k is opened into an interval of length
eps_k (a "fan segment") on which the initial state rises monotonically so that
F'(u0_hat) is linear.  The extended domain is then a list of segments, each
either constant or fan, and everything downstream works segment-wise.

Shock sets at a fixed time t are resolved by a ``Snapshot``: the aliveness
predicate of the oracle is sampled on the table grid and each alive/dead
boundary is bisected, which makes the flattened characteristic map an exact
piecewise-linear function up to the bisection tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidCx, NotAdmissible, NotInShock, OutOfDomain
from .flux import ConvexFlux, fprime_inverse, rh_speed
from .oracle import LaxOleinikOracle
from .pwlin import (Interval, PiecewiseConstantFn, PiecewiseLinearFn, left_inverse,
                    positive_variation, total_variation)

DOMAIN_TOL = 1e-12


def _finite_or_none(v):
    return float(v) if np.isfinite(v) else None


def _scalar_or(a):
    return float(a) if np.ndim(a) == 0 else a


@dataclass(frozen=True, eq=False)
class ExtendedInitialData:
    dom_x: Interval
    ext_dom: Interval
    fan_origins: np.ndarray
    fan_widths: np.ndarray
    gammas: tuple
    u0: PiecewiseConstantFn
    flux: ConvexFlux
    i_hat: PiecewiseLinearFn
    # segment table on the extended domain
    seg_lo: np.ndarray
    seg_hi: np.ndarray
    seg_fan: np.ndarray
    seg_value: np.ndarray
    seg_nu_lo: np.ndarray
    seg_nu_hi: np.ndarray
    seg_foot: np.ndarray
    _iota_offsets: np.ndarray = field(repr=False)

    # -- structure -------------------------------------------------------
    @property
    def ext_length(self) -> float:
        return self.ext_dom.length

    @property
    def boundaries(self) -> np.ndarray:
        return np.unique(np.concatenate([self.seg_lo, self.seg_hi]))

    @property
    def fan_speeds(self) -> list[tuple[float, float]]:
        f = self.seg_fan
        return list(zip(self.seg_nu_lo[f].tolist(), self.seg_nu_hi[f].tolist()))

    def jump_images(self):
        """Down-jump locations on the extended domain as (z, u_left, u_right)."""
        out = []
        first, last = 0, self.seg_lo.size - 1
        if not self.seg_fan[first] and self.seg_value[first] < self.u0.values[0]:
            out.append((float(self.seg_lo[first]), float(self.u0.values[0]), float(self.seg_value[first])))
        for j in range(self.seg_lo.size - 1):
            if not self.seg_fan[j] and not self.seg_fan[j + 1]:
                ul, ur = self.seg_value[j], self.seg_value[j + 1]
                if ul > ur:
                    out.append((float(self.seg_hi[j]), float(ul), float(ur)))
        if not self.seg_fan[last] and self.seg_value[last] > self.u0.values[-1]:
            out.append((float(self.seg_hi[last]), float(self.seg_value[last]), float(self.u0.values[-1])))
        return out

    def iota(self, x):
        x = np.asarray(x, dtype=float)
        k = np.searchsorted(self.fan_origins, x, side="left")
        return _scalar_or(x + self._iota_offsets[k])

    def segment_index(self, z):
        z = np.asarray(z, dtype=float)
        idx = np.searchsorted(self.seg_hi, z, side="left")
        return np.clip(idx, 0, self.seg_hi.size - 1)

    def _check(self, z):
        z = np.asarray(z, dtype=float)
        tol = DOMAIN_TOL * (1 + self.ext_length)
        if np.any(z < self.ext_dom.lo - tol) or np.any(z > self.ext_dom.hi + tol):
            raise OutOfDomain("point outside the extended domain")
        return z

    # -- pointwise data --------------------------------------------------
    def speed_in_segment(self, z, idx):
        lo, hi = self.seg_lo[idx], self.seg_hi[idx]
        frac = np.clip((z - lo) / np.where(hi > lo, hi - lo, 1.0), 0.0, 1.0)
        fan = self.seg_nu_lo[idx] + (self.seg_nu_hi[idx] - self.seg_nu_lo[idx]) * frac
        const = self.flux.dF(self.seg_value[idx])
        return np.where(self.seg_fan[idx], fan, const)

    def speed(self, z):
        """F'(u0_hat(z)); linear in z on fan segments."""
        z = self._check(z)
        return _scalar_or(self.speed_in_segment(z, self.segment_index(z)))

    def u0_hat(self, z):
        z = self._check(z)
        idx = self.segment_index(z)
        out = np.array(self.seg_value[idx], dtype=float)
        fan = self.seg_fan[idx]
        if np.any(fan):
            out[fan] = fprime_inverse(self.flux, self.speed_in_segment(z, idx)[fan])
        return _scalar_or(out)

    def foot(self, z):
        """Initial point of the characteristic labelled by z."""
        z = self._check(z)
        idx = self.segment_index(z)
        return _scalar_or(np.where(self.seg_fan[idx], self.seg_foot[idx], self.i_hat(z)))

    def xhat0_in_segment(self, z, idx, t):
        return self.i_hat(z) + t * self.speed_in_segment(z, idx)

    def xhat0(self, z, t):
        z = self._check(z)
        return _scalar_or(self.xhat0_in_segment(z, self.segment_index(z), t))

    def fan_points(self, n: int) -> np.ndarray:
        pts = [np.linspace(lo, hi, n + 1) for lo, hi in
               zip(self.seg_lo[self.seg_fan], self.seg_hi[self.seg_fan])]
        return np.concatenate(pts) if pts else np.empty(0)

    def u0_hat_total_variation(self) -> float:
        """TV of u0_hat across all segments, including down jumps."""
        left = np.where(self.seg_fan, [float(fprime_inverse(self.flux, v)) if f else v
                                       for f, v in zip(self.seg_fan, self.seg_nu_lo)],
                        self.seg_value)
        right = np.where(self.seg_fan, [float(fprime_inverse(self.flux, v)) if f else v
                                        for f, v in zip(self.seg_fan, self.seg_nu_hi)],
                         self.seg_value)
        inside = np.sum(np.abs(right - left))
        across = np.sum(np.abs(left[1:] - right[:-1]))
        ends = abs(left[0] - self.u0.values[0]) + abs(self.u0.values[-1] - right[-1])
        return float(inside + across + ends)

    def to_json(self) -> dict:
        return {
            "dom_x": [self.dom_x.lo, self.dom_x.hi],
            "ext_dom": [self.ext_dom.lo, self.ext_dom.hi],
            "fan_origins": self.fan_origins.tolist(),
            "fan_widths": self.fan_widths.tolist(),
            "gammas": [list(g) for g in self.gammas],
            "segments": [
                {"lo": float(a), "hi": float(b), "kind": "fan" if f else "const",
                 "value": _finite_or_none(v), "nu": [_finite_or_none(n0), _finite_or_none(n1)],
                 "foot": _finite_or_none(y)}
                for a, b, f, v, n0, n1, y in zip(self.seg_lo, self.seg_hi, self.seg_fan,
                                                 self.seg_value, self.seg_nu_lo,
                                                 self.seg_nu_hi, self.seg_foot)
            ],
            "i_hat": {"knots": self.i_hat.knots.tolist(), "values": self.i_hat.values.tolist()},
        }


def extend_initial(u0: PiecewiseConstantFn, flux: ConvexFlux,
                   dom: Interval = Interval(0.0, 1.0)) -> ExtendedInitialData:
    b, c = u0.breakpoints, u0.values
    if not (np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise NotAdmissible("non-finite initial data")
    if c[0] != 0.0 or c[-1] != 0.0:
        raise NotAdmissible("initial data must vanish outside the domain")
    if b.size and (b[0] < dom.lo or b[-1] > dom.hi):
        raise NotAdmissible("initial data must be supported in the domain")
    lo_l, hi_l, fan_l, val_l, n0_l, n1_l, foot_l = [], [], [], [], [], [], []
    ik, iv = [dom.lo], [dom.lo]
    z = dom.lo
    edges = np.concatenate([[dom.lo], b, [dom.hi]])
    origins, widths, gammas = [], [], []
    for j in range(c.size):
        a, e = edges[j], edges[j + 1]
        if e > a:
            lo_l.append(z), hi_l.append(z + (e - a)), fan_l.append(False)
            val_l.append(c[j]), n0_l.append(np.nan), n1_l.append(np.nan), foot_l.append(np.nan)
            z += e - a
            ik.append(z), iv.append(e)
        if j < c.size - 1 and c[j + 1] > c[j]:
            w = c[j + 1] - c[j]
            origins.append(b[j]), widths.append(w), gammas.append((z, z + w))
            lo_l.append(z), hi_l.append(z + w), fan_l.append(True)
            val_l.append(np.nan), n0_l.append(float(flux.dF(c[j])))
            n1_l.append(float(flux.dF(c[j + 1]))), foot_l.append(b[j])
            z += w
            ik.append(z), iv.append(b[j])
    knots, vals = np.array(ik), np.array(iv)
    keep = np.concatenate([[True], np.diff(knots) > 0])
    i_hat = PiecewiseLinearFn(knots[keep], vals[keep])
    widths_a = np.array(widths, dtype=float)
    ext = ExtendedInitialData(
        dom_x=dom,
        ext_dom=Interval(dom.lo, z),
        fan_origins=np.array(origins, dtype=float),
        fan_widths=widths_a,
        gammas=tuple(gammas),
        u0=u0,
        flux=flux,
        i_hat=i_hat,
        seg_lo=np.array(lo_l), seg_hi=np.array(hi_l), seg_fan=np.array(fan_l, dtype=bool),
        seg_value=np.array(val_l), seg_nu_lo=np.array(n0_l), seg_nu_hi=np.array(n1_l),
        seg_foot=np.array(foot_l),
        _iota_offsets=np.concatenate([[0.0], np.cumsum(widths_a)]),
    )
    if abs(ext.ext_length - dom.length - positive_variation(u0)) > 1e-12 * (1 + ext.ext_length):
        raise AssertionError("extended length mismatch")
    return ext


# ---------------------------------------------------------------------------
# shock-time function


def _alive_z(ext: ExtendedInitialData, oracle: LaxOleinikOracle, z, t):
    z = np.atleast_1d(np.asarray(z, dtype=float))
    t = np.broadcast_to(np.asarray(t, dtype=float), z.shape)
    return np.atleast_1d(oracle.alive(ext.foot(z), ext.speed(z), t))


def shock_time(ext: ExtendedInitialData, oracle: LaxOleinikOracle, z, tol_t: float | None = None):
    """Merge time of the characteristic labelled by z; T + 1 if it survives to T."""
    T = oracle.T
    tol_t = T * 1e-8 if tol_t is None else tol_t
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.full(z.shape, T + 1.0)
    dead_T = ~_alive_z(ext, oracle, z, T)
    if np.any(dead_T):
        zz = z[dead_T]
        lo = np.zeros(zz.shape)
        hi = np.full(zz.shape, T)
        while np.max(hi - lo) > tol_t:
            mid = 0.5 * (lo + hi)
            ok = _alive_z(ext, oracle, zz, np.maximum(mid, 1e-300))
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
        out[dead_T] = 0.5 * (lo + hi)
    return out


@dataclass(eq=False)
class Snapshot:
    """The flattened characteristic map at one time, as an exact P1 function."""

    t: float
    xhat: PiecewiseLinearFn
    left: np.ndarray
    right: np.ndarray
    plateau: np.ndarray


class ShockTimeTable:
    """Sampled shock-time function plus cached per-time snapshots."""

    def __init__(self, ext, oracle, grid, lambda_vals, tol_t):
        self.ext = ext
        self.oracle = oracle
        self.grid = np.asarray(grid, dtype=float)
        self.lambda_vals = np.asarray(lambda_vals, dtype=float)
        self.tol_t = tol_t
        self.T = oracle.T
        self._snaps: dict[float, Snapshot] = {}

    @property
    def sentinel(self) -> float:
        return self.T + 1.0

    def level_set(self, t: float) -> np.ndarray:
        return self.lambda_vals <= t

    def to_json(self) -> dict:
        return {"grid": self.grid.tolist(), "lambda": self.lambda_vals.tolist(),
                "tol_t": self.tol_t, "T": self.T, "sentinel": self.sentinel}

    # -- snapshots -------------------------------------------------------
    def snapshot(self, t: float) -> Snapshot:
        t = float(t)
        snap = self._snaps.get(t)
        if snap is None:
            snap = self._build_snapshot(t)
            if len(self._snaps) > 4096:
                self._snaps.clear()
            self._snaps[t] = snap
        return snap

    def _bisect(self, a, d, t, iters=50):
        """Boundary between alive points a and dead points d."""
        a, d = np.array(a, dtype=float), np.array(d, dtype=float)
        for _ in range(iters):
            mid = 0.5 * (a + d)
            ok = _alive_z(self.ext, self.oracle, mid, t)
            a = np.where(ok, mid, a)
            d = np.where(ok, d, mid)
        return 0.5 * (a + d)

    def _components(self, pts, alive, t):
        dead = ~alive
        if not np.any(dead):
            return np.empty(0), np.empty(0)
        idx = np.nonzero(dead)[0]
        starts = idx[np.concatenate([[True], np.diff(idx) > 1])]
        ends = idx[np.concatenate([np.diff(idx) > 1, [True]])]
        left = pts[starts].copy()
        right = pts[ends].copy()
        has_l = starts > 0
        has_r = ends < pts.size - 1
        if np.any(has_l):
            left[has_l] = self._bisect(pts[starts[has_l] - 1], pts[starts[has_l]], t)
        if np.any(has_r):
            right[has_r] = self._bisect(pts[ends[has_r] + 1], pts[ends[has_r]], t)
        return left, right

    def _build_snapshot(self, t: float) -> Snapshot:
        ext = self.ext
        if t <= 0:
            return Snapshot(0.0, ext.i_hat, np.empty(0), np.empty(0), np.empty(0))
        pts = np.unique(np.concatenate([self.grid, ext.boundaries]))
        tol = 1e-7 * (1 + ext.ext_length)
        for _ in range(6):
            alive = _alive_z(ext, self.oracle, pts, t)
            left, right = self._components(pts, alive, t)
            xl = ext.xhat0(left, t) if left.size else left
            xr = ext.xhat0(right, t) if right.size else right
            bad = np.abs(np.atleast_1d(xl) - np.atleast_1d(xr)) > tol
            if not np.any(bad):
                break
            extra = [np.linspace(a, b, 129)[1:-1] for a, b in zip(left[bad], right[bad])]
            pts = np.unique(np.concatenate([pts] + extra))
        xl, xr = np.atleast_1d(xl), np.atleast_1d(xr)
        has_l = np.array([np.any(pts < a) and alive[np.searchsorted(pts, a) - 1]
                          for a in left], dtype=bool) if left.size else np.empty(0, bool)
        plateau = np.where(has_l, xl, xr) if left.size else np.empty(0)
        za = pts[alive]
        kn = np.concatenate([za, left, right])
        va = np.concatenate([ext.xhat0(za, t) if za.size else za, plateau, plateau])
        order = np.argsort(kn, kind="stable")
        kn, va = kn[order], va[order]
        keep = np.concatenate([[True], np.diff(kn) > 1e-15 * (1 + ext.ext_length)])
        kn, va = kn[keep], np.maximum.accumulate(va[keep])
        return Snapshot(t, PiecewiseLinearFn(kn, va), left, right, plateau)


def build_shock_table(ext: ExtendedInitialData, oracle: LaxOleinikOracle, n_grid: int = 512,
                      n_fan: int = 32, tol_t: float | None = None) -> ShockTimeTable:
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    tol_t = oracle.T * 1e-8 if tol_t is None else tol_t
    grid = np.unique(np.concatenate([
        ext.boundaries, ext.fan_points(n_fan),
        np.linspace(ext.ext_dom.lo, ext.ext_dom.hi, n_grid)]))
    lam = shock_time(ext, oracle, grid, tol_t)
    return ShockTimeTable(ext, oracle, grid, lam, tol_t)


# ---------------------------------------------------------------------------
# evaluation through the characteristic maps


def endpoints(ext: ExtendedInitialData, table: ShockTimeTable, x: float, t: float):
    """Left and right ends of the shock interval containing x at time t."""
    ext._check(x)
    snap = table.snapshot(t)
    tol = 1e-9 * (1 + ext.ext_length)
    hit = np.nonzero((snap.left - tol <= x) & (x <= snap.right + tol))[0]
    if hit.size == 0:
        raise NotInShock(f"{x} is not in the shock set at t={t}")
    j = hit[0]
    return float(snap.left[j]), float(snap.right[j])


def xhat(ext: ExtendedInitialData, table: ShockTimeTable, z, t: float):
    z = ext._check(z)
    return _scalar_or(table.snapshot(t).xhat(z))


def _outer(ext, x, lo, hi):
    return np.where(x < lo, ext.u0.values[0], ext.u0.values[-1])


def entropy_eval(ext: ExtendedInitialData, table: ShockTimeTable, x, t: float):
    """u0_hat composed with the left inverse of the flattened characteristic map."""
    x = np.asarray(x, dtype=float)
    X = table.snapshot(t).xhat
    lo, hi = X.values[0], X.values[-1]
    inside = (x >= lo) & (x <= hi)
    out = np.array(_outer(ext, x, lo, hi), dtype=float)
    if np.any(inside):
        z = np.atleast_1d(left_inverse(X, x[inside]))
        z = np.clip(z, ext.ext_dom.lo, ext.ext_dom.hi)
        out[inside] = ext.u0_hat(z)
    return _scalar_or(out)


def relief_pieces(ext: ExtendedInitialData, table: ShockTimeTable, t: float, C_x: float):
    """Linear pieces (za, zb, va, vb) of the shifted characteristic map, in z order."""
    snap = table.snapshot(t)
    cuts = np.unique(np.concatenate([ext.boundaries, snap.left, snap.right]))
    za, zb = cuts[:-1], cuts[1:]
    keep = zb > za
    za, zb = za[keep], zb[keep]
    zm = 0.5 * (za + zb)
    idx = ext.segment_index(zm)
    va = ext.xhat0_in_segment(za, idx, t)
    vb = ext.xhat0_in_segment(zb, idx, t)
    shifted = np.zeros(zm.shape, dtype=bool)
    for a, b in zip(snap.left, snap.right):
        shifted |= (zm > a) & (zm < b)
    return za, zb, va + C_x * shifted, vb + C_x * shifted


def relief_eval(ext: ExtendedInitialData, table: ShockTimeTable, x, t: float, C_x: float):
    """u0_hat at the first z (scanning left to right) where the shifted map equals x."""
    if C_x < ext.ext_length * (1 - 1e-12):
        raise InvalidCx(f"C_x={C_x} is below the extended length {ext.ext_length}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    za, zb, va, vb = relief_pieces(ext, table, t, C_x)
    tol = 1e-13 * (1 + np.max(np.abs(x)))
    lo_v, hi_v = np.minimum(va, vb), np.maximum(va, vb)
    hit = (x[:, None] >= lo_v[None, :] - tol) & (x[:, None] <= hi_v[None, :] + tol)
    any_hit = hit.any(axis=1)
    first = np.argmax(hit, axis=1)
    a, b, fa, fb = za[first], zb[first], va[first], vb[first]
    dv = fb - fa
    frac = np.where(np.abs(dv) > 0, (x - fa) / np.where(np.abs(dv) > 0, dv, 1.0), 0.0)
    z = a + np.clip(frac, 0.0, 1.0) * (b - a)
    out = np.array(_outer(ext, x, np.min(lo_v), np.max(hi_v)), dtype=float)
    if np.any(any_hit):
        out[any_hit] = np.atleast_1d(ext.u0_hat(np.clip(z[any_hit], ext.ext_dom.lo, ext.ext_dom.hi)))
    return _scalar_or(out) if out.size > 1 else float(out[0])


def rh_speeds_at_jumps(ext: ExtendedInitialData) -> list[tuple[float, float]]:
    """(z, shock speed) for each down jump of u0_hat."""
    return [(z, float(rh_speed(ext.flux, ul, ur))) for z, ul, ur in ext.jump_images()]


def tv_u0(ext: ExtendedInitialData) -> float:
    return total_variation(ext.u0)
