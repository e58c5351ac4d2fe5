import numpy as np
import pytest
from hypothesis import given, strategies as st

from lowrank_entropy.errors import DegenerateJump, OutOfRange
from lowrank_entropy.flux import (burgers, cosh_flux, fprime_inverse, legendre, make_flux,
                                  polynomial_flux, quartic, rh_speed)

FLUXES = [burgers(), quartic(), cosh_flux(), polynomial_flux([0, 0.5, 1.0, 0.0, 0.1], -2, 2)]


def test_fprime_inverse_examples():
    assert fprime_inverse(burgers(), 0.7) == pytest.approx(0.7)
    assert fprime_inverse(quartic(), 8.0) == pytest.approx(2.0, abs=1e-10)
    assert fprime_inverse(cosh_flux(), 1.0) == pytest.approx(np.arcsinh(1.0), abs=1e-12)


def test_fprime_inverse_cosh_against_bisection():
    a, b = -2.0, 2.0
    for _ in range(100):
        m = 0.5 * (a + b)
        a, b = (m, b) if np.sinh(m) < 1.0 else (a, m)
    assert fprime_inverse(cosh_flux(), 1.0) == pytest.approx(0.881374, abs=1e-6)
    assert fprime_inverse(cosh_flux(), 1.0) == pytest.approx(a, abs=1e-10)


def test_fprime_inverse_out_of_range():
    with pytest.raises(OutOfRange):
        fprime_inverse(quartic(), 1000.0)


def test_legendre_examples():
    assert legendre(burgers(), 1.0) == pytest.approx(0.5)
    assert legendre(cosh_flux(), 1.0) == pytest.approx(0.467160, abs=1e-6)


def test_legendre_cosh_against_grid_max():
    u = np.linspace(-2, 2, 2_000_001)
    assert legendre(cosh_flux(), 1.0) == pytest.approx(np.max(u - (np.cosh(u) - 1)), abs=1e-9)


def test_rh_speed_examples():
    assert rh_speed(burgers(), 1.0, 0.0) == pytest.approx(0.5)
    assert rh_speed(burgers(), 1.0, -1.0) == 0.0
    assert rh_speed(quartic(), 2.0, 1.0) == pytest.approx(3.75)


def test_rh_degenerate():
    with pytest.raises(DegenerateJump):
        rh_speed(burgers(), 0.3, 0.3)


@pytest.mark.parametrize("flux", FLUXES, ids=lambda f: f.name)
@given(s=st.floats(0.0, 1.0), r=st.floats(0.0, 1.0))
def test_lax_ordering(flux, s, r):
    lo, hi = flux.working_range.lo, flux.working_range.hi
    a, b = lo + s * (hi - lo), lo + r * (hi - lo)
    if abs(a - b) < 1e-6:
        return
    ul, ur = max(a, b), min(a, b)
    sp = rh_speed(flux, ul, ur)
    assert flux.dF(ur) < sp < flux.dF(ul)


@pytest.mark.parametrize("flux", FLUXES, ids=lambda f: f.name)
@given(s=st.floats(0.0, 1.0))
def test_inverse_and_fenchel(flux, s):
    lo, hi = flux.working_range.lo, flux.working_range.hi
    u = lo + s * (hi - lo)
    p = float(flux.dF(u))
    assert fprime_inverse(flux, p) == pytest.approx(u, abs=1e-10)
    assert flux.F(u) + legendre(flux, p) == pytest.approx(u * p, abs=1e-10 * (1 + abs(u * p)))


def test_registry():
    assert make_flux("burgers").name == "burgers"
    assert make_flux({"name": "cosh", "lo": -1, "hi": 1}).working_range.hi == 1
    assert make_flux({"name": "polynomial", "coeffs": [0, 0, 0.5], "lo": -1, "hi": 1}).F(2.0) == 2.0
    with pytest.raises(ValueError):
        make_flux("nope")


def test_convexity_floor_enforced():
    with pytest.raises(ValueError):
        polynomial_flux([0, 0, 0, 1.0], -1, 1)  # u^3 is not convex on [-1, 1]
