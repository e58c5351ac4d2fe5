"""Transported subspaces, the inverse-bias composition and 2-layer builders.

A step sum f = sum_k c_k rho(x - x_k) composed with the left inverse of an
increasing g is the step sum with relocated steps sum_k c_k rho(x - g(x_k)).
Replacing rho by rho_eps gives a 2-layer ReLU network whose first-layer biases
are linear in the coefficients of g and whose output weights are linear in
the coefficients of f.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NotAdmissible, ShockBeforeHorizon
from .flux import ConvexFlux
from .lrnr import ArchSpec, CoeffSchedule, LowRankLayer, LRNRModel, Rank1Factor
from .pwlin import (Interval, PiecewiseConstantFn, PiecewiseLinearFn, left_inverse,
                    total_variation)


@dataclass(frozen=True, eq=False)
class TransportedSubspace:
    phi: tuple
    psi: tuple
    coeff_A: tuple  # per-coefficient (lo, hi)
    coeff_B: tuple
    dom: Interval = field(default_factory=lambda: Interval(0.0, 1.0))

    @property
    def grid(self) -> np.ndarray:
        return np.unique(np.concatenate([p.breakpoints for p in self.psi]))

    def step_coefficients(self) -> np.ndarray:
        """c[j, k] = jump of psi_j at grid point k."""
        X = self.grid
        C = np.zeros((len(self.psi), X.size))
        for j, p in enumerate(self.psi):
            if p.values[0] != 0.0:
                raise NotAdmissible("each psi must vanish to the left of its support")
            C[j] = p(X, side="right") - p(X, side="left")
        return C

    def g(self, alpha) -> PiecewiseLinearFn:
        return linear_combination(self.phi, alpha)


def linear_combination(fns: Sequence[PiecewiseLinearFn], coeffs) -> PiecewiseLinearFn:
    knots = np.unique(np.concatenate([f.knots for f in fns]))
    vals = sum(float(a) * f(knots) for a, f in zip(coeffs, fns))
    return PiecewiseLinearFn(knots, vals)


def check_admissible(phi, coeff_A, dom: Interval):
    """Slope bounds and range coverage of sum alpha_i phi_i over the corners of the box."""
    c_min, c_max = np.inf, -np.inf
    diag = []
    covered = True
    for corner in itertools.product(*[(lo, hi) for lo, hi in coeff_A]):
        g = linear_combination(phi, corner)
        s = g.slopes() if g.knots.size > 1 else np.array([0.0])
        c_min, c_max = min(c_min, float(np.min(s))), max(c_max, float(np.max(s)))
        cov = g.values[0] <= dom.lo + 1e-12 and g.values[-1] >= dom.hi - 1e-12
        covered &= bool(cov)
        diag.append({"alpha": list(corner), "min_slope": float(np.min(s)),
                     "max_slope": float(np.max(s)), "covers": bool(cov)})
    ok = bool(c_min > 0 and covered)
    return ok, c_min, c_max, diag


def ibtrick_compose(c, x, eps: float, g_eps: PiecewiseLinearFn) -> PiecewiseLinearFn:
    """sum_i c_i rho_eps(. - g_eps(x_i)) as an exact P1 function."""
    c = np.asarray(c, dtype=float)
    centers = np.asarray(g_eps(np.asarray(x, dtype=float)), dtype=float).reshape(-1)
    return step_sum_p1(c, centers, eps)


def step_sum_p1(c, centers, eps: float) -> PiecewiseLinearFn:
    c = np.asarray(c, dtype=float)
    centers = np.asarray(centers, dtype=float)
    if c.size == 0:
        return PiecewiseLinearFn([0.0], [0.0])
    knots = np.unique(np.concatenate([centers - eps / 2, centers + eps / 2]))
    vals = np.clip((knots[:, None] - centers[None, :]) / eps + 0.5, 0.0, 1.0) @ c
    return PiecewiseLinearFn(knots, vals)


def compose_left_inverse(f: PiecewiseConstantFn, g: PiecewiseLinearFn, dom: Interval) -> PiecewiseConstantFn:
    """f o g^+ on dom, evaluated exactly through the left inverse of g."""
    cand = np.asarray(g(f.breakpoints), dtype=float)
    cand = np.unique(cand[(cand > dom.lo) & (cand < dom.hi)])
    edges = np.concatenate([[dom.lo], cand, [dom.hi]])
    mids = 0.5 * (edges[:-1] + edges[1:])
    lo, hi = np.maximum.accumulate(g.values)[[0, -1]]
    inner = np.atleast_1d(left_inverse(g, np.clip(mids, lo, hi)))
    vals = np.atleast_1d(f(inner))
    return PiecewiseConstantFn(cand, vals)


def lemma_bound_p0(f: PiecewiseConstantFn, eps: float, g, g_eps, grid) -> float:
    """TV(f) (eps/4 + max over the grid of |g - g_eps|)."""
    grid = np.asarray(grid, dtype=float)
    return total_variation(f) * (eps / 4 + float(np.max(np.abs(g(grid) - g_eps(grid)))))


def _mu(alpha, beta) -> dict:
    return {"gamma1": [1.0], "gamma2": list(beta) + [0.0],
            "theta1": list(alpha) + [1.0], "theta2": []}


def _sched(v) -> CoeffSchedule:
    return v if isinstance(v, CoeffSchedule) else CoeffSchedule(float(v), 0.0)


def build_2layer(ts: TransportedSubspace, eps: float, alpha, beta, check: bool = True):
    """Two-layer network computing f_eps(beta) o+ g(alpha); returns (model, mu)."""
    if check:
        ok, *_ = check_admissible(ts.phi, ts.coeff_A, ts.dom)
        if not ok:
            raise NotAdmissible("transported subspace is not admissible on its coefficient box")
    X = ts.grid
    C = ts.step_coefficients()
    N = X.size
    pm = np.array([1.0, 1.0])
    W1 = ((Rank1Factor(np.ones(2 * N), [1.0]), CoeffSchedule(1.0, 0.0)),)
    B1 = tuple((Rank1Factor(-np.asarray(p(X)), pm), _sched(a)) for p, a in zip(ts.phi, alpha))
    B1 += ((Rank1Factor(np.ones(N), [eps / 2, -eps / 2]), CoeffSchedule(1.0, 0.0)),)
    W2 = tuple((Rank1Factor([1.0], np.kron(C[j], [1 / eps, -1 / eps])), _sched(b))
               for j, b in enumerate(beta))
    layers = (LowRankLayer(2 * N, 1, W1, B1), LowRankLayer(1, 2 * N, W2, ()))
    model = LRNRModel(ArchSpec((1, 2 * N, 1)), layers, {"builder": "two_layer", "eps": eps})
    return model, _mu


@dataclass(frozen=True, eq=False)
class ClassicalBuild:
    model: LRNRModel
    grid: np.ndarray
    steps: np.ndarray
    eps: float
    phi: tuple
    T: float

    def centers(self, t):
        return self.grid + t * self.phi[1](self.grid)

    def as_p1(self, t) -> PiecewiseLinearFn:
        return step_sum_p1(self.steps, self.centers(t), self.eps)


def build_classical_lrnr(u0: Callable, flux: ConvexFlux, T: float, K: int,
                         dom: Interval = Interval(0.0, 1.0), eps: float | None = None) -> ClassicalBuild:
    """Rank-3 two-layer network for the pre-shock solution, affine in t."""
    h = dom.length / K
    eps = h / 2 if eps is None else eps
    X = dom.lo + h * np.arange(K + 1)
    mids = 0.5 * (X[:-1] + X[1:])
    m = np.asarray(u0(mids), dtype=float)
    steps = np.diff(np.concatenate([[0.0], m, [0.0]]))
    speed = np.asarray(flux.dF(u0(X)), dtype=float)
    slopes = 1.0 + T * np.diff(speed) / h
    if np.min(slopes) <= 0:
        raise ShockBeforeHorizon(f"characteristics cross before T={T} (min slope {np.min(slopes):.3g})")
    phi = (PiecewiseLinearFn(X, X), PiecewiseLinearFn(X, speed))
    psi = (PiecewiseConstantFn(X, np.concatenate([[0.0], m, [0.0]])),)
    # coefficient box only over t in [0, T]
    ts = TransportedSubspace(phi, psi, ((1.0, 1.0), (0.0, T)), ((1.0, 1.0),), dom)
    ok, *_ = check_admissible(phi, ts.coeff_A, Interval(X[0], X[-1]))
    if not ok:
        raise ShockBeforeHorizon("corner slope check failed")
    model, _ = build_2layer(ts, eps, [CoeffSchedule(1.0, 0.0), CoeffSchedule(0.0, 1.0)],
                            [CoeffSchedule(1.0, 0.0)], check=False)
    model.meta.update({"builder": "classical", "K": K, "T": T})
    return ClassicalBuild(model, X, steps, eps, phi, T)
