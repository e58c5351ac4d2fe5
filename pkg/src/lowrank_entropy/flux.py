"""Smooth strictly convex fluxes with derivative inverse and convex conjugate."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DegenerateJump, OutOfRange
from .pwlin import Interval

Fn = Callable[[np.ndarray], np.ndarray]


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class ConvexFlux:
    """F, F', F'' on a finite working range; (F')^-1 and F* derived numerically."""

    name: str
    F: Fn
    dF: Fn
    d2F: Fn
    working_range: Interval
    convexity_floor: float
    dF_inv: Optional[Fn] = None
    conjugate: Optional[Fn] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.convexity_floor > 0:
            raise ValueError("convexity_floor must be positive")
        u = np.linspace(self.working_range.lo, self.working_range.hi, 257)
        if np.min(self.d2F(u)) < self.convexity_floor * (1 - 1e-12):
            raise ValueError(f"flux {self.name!r} violates its convexity floor")

    @property
    def speed_range(self) -> tuple[float, float]:
        return float(self.dF(self.working_range.lo)), float(self.dF(self.working_range.hi))

    def in_speed_range(self, s, tol: float = 1e-12):
        lo, hi = self.speed_range
        s = np.asarray(s, dtype=float)
        pad = tol * (1 + np.abs(s))
        return (s >= lo - pad) & (s <= hi + pad)

    def max_fpp(self, lo: float, hi: float, n: int = 1001) -> float:
        """Sup of F'' over [lo, hi] by dense scan."""
        if hi < lo:
            lo, hi = hi, lo
        return float(np.max(self.d2F(np.linspace(lo, hi, n))))


def fprime_inverse(flux: ConvexFlux, s, tol: float = 1e-12, max_iter: int = 200):
    """u with F'(u) = s; safeguarded Newton inside a bisection bracket."""
    s = np.asarray(s, dtype=float)
    if not np.all(flux.in_speed_range(s)):
        raise OutOfRange("speed outside F'(working_range)")
    if flux.dF_inv is not None:
        return _out(flux.dF_inv(s))
    lo = np.full(s.shape, flux.working_range.lo)
    hi = np.full(s.shape, flux.working_range.hi)
    u = 0.5 * (lo + hi)
    for _ in range(max_iter):
        r = flux.dF(u) - s
        done = np.abs(r) <= tol * (1 + np.abs(s))
        if np.all(done):
            break
        hi = np.where(r > 0, u, hi)
        lo = np.where(r <= 0, u, lo)
        step = u - r / flux.d2F(u)
        inside = (step > lo) & (step < hi)
        u = np.where(done, u, np.where(inside, step, 0.5 * (lo + hi)))
    return _out(u)


def legendre(flux: ConvexFlux, p):
    """F*(p) = p u* - F(u*) with F'(u*) = p."""
    p = np.asarray(p, dtype=float)
    if flux.conjugate is not None:
        if not np.all(flux.in_speed_range(p)):
            raise OutOfRange("slope outside F'(working_range)")
        return _out(flux.conjugate(p))
    u = np.asarray(fprime_inverse(flux, p))
    return _out(p * u - flux.F(u))


def rh_speed(flux: ConvexFlux, ul, ur):
    ul = np.asarray(ul, dtype=float)
    ur = np.asarray(ur, dtype=float)
    if np.any(np.abs(ul - ur) < 1e-14):
        raise DegenerateJump("states too close for a Rankine-Hugoniot speed")
    return _out((flux.F(ul) - flux.F(ur)) / (ul - ur))


def burgers(lo: float = -10.0, hi: float = 10.0) -> ConvexFlux:
    return ConvexFlux(
        name="burgers",
        F=lambda u: 0.5 * np.asarray(u) ** 2,
        dF=lambda u: np.asarray(u, dtype=float) * 1.0,
        d2F=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        working_range=Interval(lo, hi),
        convexity_floor=1.0,
        dF_inv=lambda s: np.asarray(s, dtype=float) * 1.0,
        conjugate=lambda p: 0.5 * np.asarray(p) ** 2,
    )


def quartic(lo: float = 0.25, hi: float = 4.0) -> ConvexFlux:
    return ConvexFlux(
        name="quartic",
        F=lambda u: 0.25 * np.asarray(u) ** 4,
        dF=lambda u: np.asarray(u) ** 3,
        d2F=lambda u: 3.0 * np.asarray(u) ** 2,
        working_range=Interval(lo, hi),
        convexity_floor=3.0 * min(lo * lo, hi * hi) if lo * hi > 0 else 1e-300,
        params={"lo": lo, "hi": hi},
    )


def cosh_flux(lo: float = -2.0, hi: float = 2.0) -> ConvexFlux:
    return ConvexFlux(
        name="cosh",
        F=lambda u: np.cosh(u) - 1.0,
        dF=np.sinh,
        d2F=np.cosh,
        working_range=Interval(lo, hi),
        convexity_floor=1.0,
        params={"lo": lo, "hi": hi},
    )


def polynomial_flux(coeffs: Sequence[float], lo: float, hi: float) -> ConvexFlux:
    """F(u) = sum_j coeffs[j] u^j."""
    P = Polynomial(np.asarray(coeffs, dtype=float))
    dP, d2P = P.deriv(1), P.deriv(2)
    floor = float(np.min(d2P(np.linspace(lo, hi, 1001))))
    return ConvexFlux(
        name="polynomial",
        F=P,
        dF=dP,
        d2F=d2P,
        working_range=Interval(lo, hi),
        convexity_floor=floor,
        params={"coeffs": list(map(float, coeffs)), "lo": lo, "hi": hi},
    )


FLUX_REGISTRY = {"burgers": burgers, "quartic": quartic, "cosh": cosh_flux}


def make_flux(spec) -> ConvexFlux:
    """Build a flux from a registry name or a dict {"name": ..., params...}."""
    if isinstance(spec, str):
        spec = {"name": spec}
    spec = dict(spec)
    name = spec.pop("name")
    if name == "polynomial":
        return polynomial_flux(spec["coeffs"], spec["lo"], spec["hi"])
    try:
        return FLUX_REGISTRY[name](**spec)
    except KeyError:
        raise ValueError(f"unknown flux {name!r}") from None
