"""Time-layered approximation of the flattened characteristic map and the
resulting continuous piecewise-linear approximation of the entropy solution.

On the uniform time grid t_k = (k - 1) T / K (k = 1..K) each layer stores the
nodal time-slope vtilde_k on a spatial grid z, chosen so that
    I_hat(z) + t_k vtilde_k(z) = X_hat(z, t_k)
at every node.  The slices eta_k = vtilde_{k+1} - vtilde_k are P1 functions
extended by zero; the space-time map

    chi(x, t) = I_hat(x) + t vtilde_K(x)
                - t sum_{k=1}^{K-1} eta_k(x - C_x relu((K/T)(t - t_k)))

reproduces I_hat + t_j vtilde_j at every grid time t_j, because the slices of
layers already passed are pushed beyond the extended domain.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from .characteristics import ExtendedInitialData, ShockTimeTable
from .classical import step_sum_p1
from .errors import CapExceeded, InvalidCx, NotAdmissible, OutOfDomain
from .flux import ConvexFlux, rh_speed
from .lrnr import (DENSE_CAP, ArchSpec, CoeffSchedule, LowRankLayer, LRNRModel,
                   Rank1Factor)
from .oracle import LaxOleinikOracle
from .pwlin import PiecewiseConstantFn, PiecewiseLinearFn, total_variation


@dataclass
class EntropyBuildConfig:
    K: int
    T: float
    C_x: float | None = None  # defaults to the extended length
    eps: float | None = None  # ramp width, defaults to 1/K
    eps0: float | None = None  # activation width T/K (documentation only)
    fill: int | None = None  # uniform grid points, defaults to K
    fan_steps: int | None = None  # steps per fan in u0_hat_eps, defaults to K
    include_shock_endpoints: bool = False
    beta_rtol: float = 1e-9

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("K must be at least 2")
        if not self.T > 0:
            raise ValueError("T must be positive")


@dataclass(frozen=True, eq=False)
class TimeLayer:
    k: int
    t_k: float
    vtilde_k: np.ndarray  # nodal time slope on the z grid, so that I_hat + t_k vtilde_k = X_hat
    jieut_k: np.ndarray  # I_hat + t_k vtilde_k on the z grid
    speed_k: np.ndarray  # F'(u0_hat) where alive, F'(u0_hat) at the left shock end where dead

    def vtilde(self, z_grid) -> PiecewiseLinearFn:
        return PiecewiseLinearFn(z_grid, self.vtilde_k)


@dataclass(frozen=True, eq=False)
class EtaSlice:
    """A compactly supported P1 function and its ReLU expansion sum_q beta_q relu(y - z_q)."""

    k: int
    knots: np.ndarray
    values: np.ndarray
    beta: np.ndarray

    def __call__(self, y):
        if self.knots.size == 0:
            return np.zeros(np.shape(y))
        return np.interp(y, self.knots, self.values, left=0.0, right=0.0)


def _relu_expansion(z, vals):
    slopes = np.diff(vals) / np.diff(z)
    return np.diff(np.concatenate([[0.0], slopes, [0.0]]))


def _clean_slice(k, z, vals, rtol):
    """Drop nodes where the slope does not change (up to rounding)."""
    if not np.any(vals):
        return EtaSlice(k, np.empty(0), np.empty(0), np.empty(0))
    beta = _relu_expansion(z, vals)
    keep = np.abs(beta) > rtol * np.max(np.abs(beta))
    kz, kv = z[keep], vals[keep]
    return EtaSlice(k, kz, kv, _relu_expansion(kz, kv) if kz.size > 1 else np.zeros(kz.size))


@dataclass(eq=False)
class EntropyApprox:
    config: EntropyBuildConfig
    ext: ExtendedInitialData
    table: ShockTimeTable
    oracle: LaxOleinikOracle
    z_grid: np.ndarray
    t_grid: np.ndarray
    layers: list
    eta: list
    x_steps: np.ndarray
    c_steps: np.ndarray
    C_x: float
    eps: float
    i_hat_x: np.ndarray = field(init=False)
    vK_x: np.ndarray = field(init=False)

    def __post_init__(self):
        self.i_hat_x = np.asarray(self.ext.i_hat(self.x_steps), dtype=float)
        self.vK_x = np.interp(self.x_steps, self.z_grid, self.layers[-1].vtilde_k)

    @property
    def K(self) -> int:
        return self.config.K

    @property
    def T(self) -> float:
        return self.config.T

    @property
    def u0_eps(self) -> PiecewiseConstantFn:
        from .pwlin import p0_from_steps
        return p0_from_steps(0.0, self.x_steps, self.c_steps)

    def vtilde_K(self, x):
        return np.interp(x, self.z_grid, self.layers[-1].vtilde_k)

    def _shift(self, t):
        return self.C_x * np.maximum((self.K / self.T) * (np.asarray(t, dtype=float) - self.t_grid[:-1]), 0.0)

    def eta_sum(self, x, t: float):
        """sum_{k=K-1..1} eta_k(x - shift_k(t)), accumulated from the last slice down."""
        x = np.asarray(x, dtype=float)
        shifts = self._shift(t)
        acc = np.zeros(x.shape)
        for k in range(self.K - 2, -1, -1):
            acc = acc + self.eta[k](x - shifts[k])
        return acc

    def jieut_eval(self, x, t: float):
        """Reference partial-sum form: only slices with t_k >= t contribute."""
        x = np.asarray(x, dtype=float)
        acc = np.zeros(x.shape)
        for k in range(self.K - 2, -1, -1):
            if self.t_grid[k] >= t:
                acc = acc + self.eta[k](x)
        return self.ext.i_hat(x) + t * (self.vtilde_K(x) - acc)


def error_budget(u0: PiecewiseConstantFn, flux: ConvexFlux, T: float, K: int) -> dict:
    tv = total_variation(u0)
    lo, hi = float(np.min(u0.values)), float(np.max(u0.values))
    f2 = flux.max_fpp(lo, hi) if hi > lo else float(flux.d2F(np.array([lo]))[0])
    C = T * tv * f2
    return {
        "C": C, "TV": tv, "F2": f2, "K": K, "T": T,
        "xi_error": C / K,
        "eta_bound": 4 * C / K,
        "chieut_bound": (1 + 10 * C) / K,
        "tv_bound": 1 + C,
        "hbar_bound": tv * (1 + tv) * (1 + T * f2) / K,
    }


def _u0_hat_steps(ext: ExtendedInitialData, n_fan: int):
    xs, cs = [], []
    for z, ul, ur in ext.jump_images():
        xs.append(z), cs.append(ur - ul)
    for lo, hi in zip(ext.seg_lo[ext.seg_fan], ext.seg_hi[ext.seg_fan]):
        edges = np.linspace(lo, hi, n_fan + 1)
        u = np.asarray(ext.u0_hat(edges), dtype=float)
        xs.extend(0.5 * (edges[:-1] + edges[1:])), cs.extend(np.diff(u))
    xs, cs = np.asarray(xs, dtype=float), np.asarray(cs, dtype=float)
    order = np.argsort(xs, kind="stable")
    return xs[order], cs[order]


def _vtilde(ext, table, z, t, jumps_rh):
    """Nodal time slope reproducing X_hat(z, t) from I_hat(z), and the speed carried
    by the left end of the shock component for dead nodes."""
    speed = np.asarray(ext.speed(z), dtype=float)
    if t <= 0:
        v = speed.copy()
        for zj, s in jumps_rh:
            v[np.isclose(z, zj, rtol=0, atol=1e-14)] = s
        return v, v.copy()
    snap = table.snapshot(t)
    tol = 1e-12 * (1 + ext.ext_length)
    v = speed.copy()
    carried = speed.copy()
    for a, b in zip(snap.left, snap.right):
        dead = (z >= a - tol) & (z <= b + tol)
        if np.any(dead):
            v[dead] = (snap.xhat(z[dead]) - ext.i_hat(z[dead])) / t
            carried[dead] = ext.speed(min(max(a, ext.ext_dom.lo), ext.ext_dom.hi))
    return v, carried


def build(ext: ExtendedInitialData, table: ShockTimeTable, oracle: LaxOleinikOracle,
          config: EntropyBuildConfig) -> EntropyApprox:
    K, T = config.K, config.T
    if T > oracle.T * (1 + 1e-12):
        raise ValueError("build horizon exceeds the oracle horizon")
    C_x = ext.ext_length if config.C_x is None else config.C_x
    if C_x < ext.ext_length * (1 - 1e-12):
        raise InvalidCx(f"C_x={C_x} is below the extended length {ext.ext_length}")
    eps = 1.0 / K if config.eps is None else config.eps
    t_grid = T * np.arange(K) / K
    x_steps, c_steps = _u0_hat_steps(ext, config.fan_steps or K)
    parts = [ext.boundaries, x_steps,
             np.linspace(ext.ext_dom.lo, ext.ext_dom.hi, (config.fill or K) + 1)]
    if config.include_shock_endpoints:
        for t in t_grid[1:]:
            snap = table.snapshot(t)
            parts += [snap.left, snap.right]
    z = np.unique(np.concatenate(parts))
    z = z[(z >= ext.ext_dom.lo) & (z <= ext.ext_dom.hi)]
    jumps_rh = [(zj, float(rh_speed(ext.flux, ul, ur))) for zj, ul, ur in ext.jump_images()]
    i_hat_z = np.asarray(ext.i_hat(z), dtype=float)
    layers = []
    for k, t in enumerate(t_grid, start=1):
        v, carried = _vtilde(ext, table, z, t, jumps_rh)
        layers.append(TimeLayer(k, float(t), v, i_hat_z + t * v, carried))
    eta = []
    for k in range(K - 1):
        d = layers[k + 1].vtilde_k - layers[k].vtilde_k
        scale = max(1.0, float(np.max(np.abs(d))))
        if abs(d[0]) > 1e-12 * scale or abs(d[-1]) > 1e-12 * scale:
            raise NotAdmissible("time slices must vanish at the ends of the extended domain")
        d[0] = d[-1] = 0.0
        eta.append(_clean_slice(k + 1, z, d, config.beta_rtol))
    return EntropyApprox(config, ext, table, oracle, z, t_grid, layers, eta,
                         x_steps, c_steps, float(C_x), float(eps))


# ---------------------------------------------------------------------------
# evaluation


def _check_t(ea: EntropyApprox, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > ea.T * (1 + 1e-12)):
        raise OutOfDomain("time outside [0, T]")
    return t


def chieut_eval(ea: EntropyApprox, x, t: float):
    t = float(_check_t(ea, t))
    x = np.asarray(x, dtype=float)
    out = ea.ext.i_hat(x) + t * (ea.vtilde_K(x) - ea.eta_sum(x, t))
    return float(out) if np.ndim(out) == 0 else out


def centers(ea: EntropyApprox, t: float) -> np.ndarray:
    """chi(x_i, t) for every step location of u0_hat_eps."""
    return ea.i_hat_x + t * (ea.vK_x - ea.eta_sum(ea.x_steps, t))


def hbar_p1(ea: EntropyApprox, t: float) -> PiecewiseLinearFn:
    return step_sum_p1(ea.c_steps, centers(ea, float(_check_t(ea, t))), ea.eps)


def _hbar_from_centers(ea, x, cen):
    y = (x[..., None] - cen) / ea.eps + 0.5
    return np.clip(y, 0.0, 1.0) @ ea.c_steps


def hbar_eval(ea: EntropyApprox, x, t):
    """sum_i c_i rho_eps(x - chi(x_i, t)); x and t broadcast together."""
    x = np.asarray(x, dtype=float)
    t = _check_t(ea, t)
    dom = ea.ext.dom_x
    if np.any(x < dom.lo - 1e-12) or np.any(x > dom.hi + 1e-12):
        raise OutOfDomain("x outside the physical domain")
    if t.ndim == 0:
        out = _hbar_from_centers(ea, x, centers(ea, float(t)))
        return float(out) if np.ndim(out) == 0 else out
    xb, tb = np.broadcast_arrays(x, t)
    out = np.empty(xb.shape)
    for tv in np.unique(tb):
        sel = tb == tv
        out[sel] = _hbar_from_centers(ea, xb[sel], centers(ea, float(tv)))
    return out


def march_eval(ea: EntropyApprox, x_grid, t_grid) -> np.ndarray:
    """h_bar on a tensor grid by marching in time.

    Per time step only the active slice is evaluated at the step locations; the
    slices still waiting are held as a running suffix sum, and the ramp sum is
    taken by one sorted sweep over the spatial grid.  Output has shape
    (len(t_grid), len(x_grid)).
    """
    x_grid = np.asarray(x_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be nondecreasing")
    _check_t(ea, t_grid)
    K, eps = ea.K, ea.eps
    tk = ea.t_grid.tolist()
    xi = ea.x_steps
    N = xi.size
    # suffix[j] = sum over slices k = K-1 .. j+1 (0-based), accumulated from the top
    rows = [ea.eta[k](xi) for k in range(K - 1)]
    suffix = [None] * K
    acc = np.zeros(N)
    suffix[K - 1] = acc
    for k in range(K - 2, -1, -1):
        acc = acc + rows[k]
        suffix[k] = acc
    xs_order = np.argsort(x_grid, kind="stable")
    xs_sorted = x_grid[xs_order].tolist()
    c = ea.c_steps.tolist()
    ihat, vK = ea.i_hat_x.tolist(), ea.vK_x.tolist()
    half = eps / 2
    out = np.empty((t_grid.size, x_grid.size))
    j = 0
    order = list(range(N))
    for row, t in enumerate(t_grid.tolist()):
        while j + 1 < K and t >= tk[j + 1]:
            j += 1
        base = suffix[j + 1] if j + 1 < K else suffix[K - 1]
        base = base.tolist()
        if j < K - 1:
            sl = ea.eta[j]
            kn, kv = sl.knots.tolist(), sl.values.tolist()
            shift = ea.C_x * max((K / ea.T) * (t - tk[j]), 0.0)
            act = []
            for i in range(N):
                y = xi[i] - shift
                if not kn or y <= kn[0] or y >= kn[-1]:
                    act.append(0.0)
                    continue
                q = bisect.bisect_right(kn, y)
                slope = (kv[q] - kv[q - 1]) / (kn[q] - kn[q - 1])
                act.append(slope * (y - kn[q - 1]) + kv[q - 1])
            cen = [ihat[i] + t * (vK[i] - (base[i] + act[i])) for i in range(N)]
        else:
            cen = [ihat[i] + t * (vK[i] - base[i]) for i in range(N)]
        order.sort(key=cen.__getitem__)
        cs = [cen[i] for i in order]
        cc = [c[i] for i in order]
        prefix = [0.0]
        for v in cc:
            prefix.append(prefix[-1] + v)
        full = start = 0
        vals = []
        for x in xs_sorted:
            while full < N and cs[full] + half <= x:
                full += 1
            while start < N and cs[start] - half < x:
                start += 1
            s = prefix[full]
            for m in range(full, start):
                r = (x - cs[m]) / eps + 0.5
                if r >= 1.0:
                    s += cc[m]
                elif r > 0.0:
                    s += cc[m] * r
            vals.append(s)
        out[row, xs_order] = vals
    return out


# ---------------------------------------------------------------------------
# diagnostics


def eta_sup_norms(ea: EntropyApprox) -> np.ndarray:
    """max over t in [t_k, t_{k+1}] of ||t eta_k||_inf, i.e. t_{k+1} ||eta_k||_inf."""
    return np.array([ea.t_grid[k + 1] * (np.max(np.abs(s.values)) if s.values.size else 0.0)
                     for k, s in enumerate(ea.eta)])


def chieut_sup_error(ea: EntropyApprox, t_samples, n_scan: int = 2001) -> float:
    from .characteristics import xhat
    z = np.unique(np.concatenate([np.linspace(ea.ext.ext_dom.lo, ea.ext.ext_dom.hi, n_scan), ea.z_grid]))
    worst = 0.0
    for t in t_samples:
        worst = max(worst, float(np.max(np.abs(xhat(ea.ext, ea.table, z, t) - chieut_eval(ea, z, t)))))
    return worst


def dof_summary(ea: EntropyApprox) -> dict:
    n_beta = sum(s.knots.size for s in ea.eta)
    return {"N": int(ea.x_steps.size), "z_grid": int(ea.z_grid.size), "relu_terms": int(n_beta),
            "terms_per_K": n_beta / ea.K}


# ---------------------------------------------------------------------------
# five-layer network


def relu_terms(ea: EntropyApprox):
    """Flattened (t_k, z_q, beta_q) over all slices with a nonzero slope change."""
    tk, zq, bq = [], [], []
    for k, s in enumerate(ea.eta):
        for z, b in zip(s.knots, s.beta):
            if b != 0.0:
                tk.append(ea.t_grid[k]), zq.append(z), bq.append(b)
    return np.array(tk), np.array(zq), np.array(bq)


def build_5layer_lrnr(ea: EntropyApprox, x_off: float = 1.0, A: float | None = None,
                      audit: bool = False) -> LRNRModel:
    """Depth-5 network equal to h_bar; every layer is at most two structured
    rank-1 factors with coefficients affine in t.

    Layer 1: [relu(x + x_off), relu((K/T)(t - t_j)) for each ReLU term j]
    Layer 2: per step i and term j, relu(x_i - z_j - C_x s_j), plus a carrier of x
    Layer 3: D_i = relu(x - chi(x_i, t) + A)
    Layer 4: the two ramp ReLUs around each chi(x_i, t)
    Layer 5: sum_i (c_i / eps)(upper - lower)
    """
    K, T, eps, C_x = ea.K, ea.T, ea.eps, ea.C_x
    A = eps if A is None else A
    if A < eps / 2:
        raise ValueError("A must be at least eps/2")
    tk, zq, bq = relu_terms(ea)
    J = tk.size
    x_steps, c_steps, i_hat_x, vK_x = ea.x_steps, ea.c_steps, ea.i_hat_x, ea.vK_x
    if x_steps.size == 0:  # no jumps at all: one zero-weight step keeps every layer non-empty
        x_steps = np.array([ea.ext.ext_dom.lo])
        c_steps = np.zeros(1)
        i_hat_x = np.asarray(ea.ext.i_hat(x_steps), dtype=float)
        vK_x = np.asarray(ea.vtilde_K(x_steps), dtype=float)
    N = x_steps.size
    m2 = J + 1
    dims = (1, m2, N * m2, N, 2 * N, 1)
    if audit and max(dims) > DENSE_CAP:
        raise CapExceeded(f"width {max(dims)} exceeds the dense cap {DENSE_CAP}")
    one = CoeffSchedule(1.0, 0.0)
    lin = CoeffSchedule(0.0, 1.0)
    e_x = np.zeros(m2)
    e_x[0] = 1.0
    onesJ = np.ones(J)
    L1 = LowRankLayer(m2, 1,
                      ((Rank1Factor(e_x, [1.0]), one),),
                      ((Rank1Factor(np.concatenate([[x_off], -(K / T) * tk]), [1.0]), one),
                       (Rank1Factor(np.concatenate([[0.0], (K / T) * onesJ]), [1.0]), lin)))
    L2 = LowRankLayer(N * m2, m2,
                      ((Rank1Factor(np.ones(N), np.concatenate([[1.0], -C_x * onesJ]), "kron_dR"), one),),
                      ((Rank1Factor(x_steps, np.concatenate([[0.0], onesJ])), one),
                       (Rank1Factor(np.ones(N), np.concatenate([[0.0], -zq])), one)))
    L3 = LowRankLayer(N, N * m2,
                      ((Rank1Factor(np.ones(N), np.concatenate([[1.0], np.zeros(J)]), "kron_dL"), one),
                       (Rank1Factor(np.ones(N), np.concatenate([[0.0], bq]), "kron_dL"), lin)),
                      ((Rank1Factor(A - x_off - i_hat_x, [1.0]), one),
                       (Rank1Factor(-vK_x, [1.0]), lin)))
    L4 = LowRankLayer(2 * N, N,
                      ((Rank1Factor([1.0, 1.0], np.ones(N), "kron_dR"), one),),
                      ((Rank1Factor([eps / 2 - A, -eps / 2 - A], np.ones(N)), one),))
    L5 = LowRankLayer(1, 2 * N,
                      ((Rank1Factor([1.0], np.concatenate([c_steps / eps, -c_steps / eps])), one),),
                      ())
    meta = {"builder": "entropy_5layer", "K": K, "T": T, "N": int(N), "relu_terms": int(J),
            "eps": eps, "C_x": C_x, "x_off": x_off, "A": A}
    return LRNRModel(ArchSpec(dims), (L1, L2, L3, L4, L5), meta)
