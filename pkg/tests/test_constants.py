import math

import numpy as np
import pytest

from nsblab.constants import (
    DerivedScales,
    PhysicalConstants,
    derive_scales,
    from_dimensionless,
    to_dimensionless,
)

# Reference values computed by hand from the CODATA-2018 constants:
#   tau_p = hbar / (planck_mass * c^2)
#   E_gev = planck_mass * c^2 / 1.602176634e-10
TAU_P_EXPECTED = 5.391247293957071e-44
ENERGY_GEV_EXPECTED = 1.2208899363332538e19


def test_default_constants_are_codata2018():
    c = PhysicalConstants()
    assert c.hbar == 1.054571817e-34
    assert c.c == 2.99792458e8
    assert c.planck_mass == 2.176434e-8


def test_planck_mass_order_matches_grams():
    grams = PhysicalConstants().planck_mass * 1e3
    assert 2.17e-5 <= grams <= 2.18e-5


@pytest.mark.parametrize("bad", [
    dict(hbar=0.0), dict(hbar=-1.0), dict(c=float("nan")),
    dict(planck_mass=float("inf")), dict(c=0.0),
])
def test_invalid_constants_rejected(bad):
    with pytest.raises(ValueError):
        PhysicalConstants(**bad)


def test_derived_scales_values():
    s = derive_scales(PhysicalConstants())
    assert s.tau_p == pytest.approx(TAU_P_EXPECTED, rel=1e-12)
    assert s.tau_p == pytest.approx(5.391e-44, rel=1e-3)
    assert s.energy_p_gev == pytest.approx(ENERGY_GEV_EXPECTED, rel=1e-12)
    assert s.length_p == pytest.approx(s.tau_p * PhysicalConstants().c, rel=1e-15)
    assert s.omega == pytest.approx(1.0 / s.tau_p, rel=1e-15)
    assert s.period == pytest.approx(math.pi * s.tau_p, rel=1e-15)


def test_tau_times_energy_returns_hbar():
    c = PhysicalConstants()
    s = derive_scales(c)
    # allow a single rounding of slack
    assert s.tau_p * s.energy_p == pytest.approx(c.hbar, rel=1e-15)


def test_natural_units():
    s = derive_scales(PhysicalConstants.natural_units())
    assert s.tau_p == 1.0
    assert s.energy_p == 1.0
    assert s.omega == 1.0
    assert s.period == pytest.approx(math.pi)


def test_derive_scales_is_pure():
    c = PhysicalConstants()
    assert derive_scales(c) == derive_scales(c)


def test_to_dimensionless_definitions():
    c = PhysicalConstants()
    s = derive_scales(c)
    energy_p = c.planck_mass * c.c**2
    out = to_dimensionless(s.tau_p, 0.0, 0.0, c.planck_mass, s, c)
    assert out.t_hat == pytest.approx(1.0, rel=1e-14)
    assert out.v == 0.0
    assert out.r == pytest.approx(1.0, rel=1e-14)
    assert to_dimensionless(0.0, 0.0, 0.0, 100.0 * c.planck_mass, s, c).r \
        == pytest.approx(0.01, rel=1e-14)
    assert to_dimensionless(0.0, 0.0, energy_p / 2.0, c.planck_mass, s, c).v \
        == pytest.approx(0.5, rel=1e-14)


def test_from_dimensionless_definitions():
    c = PhysicalConstants()
    s = derive_scales(c)
    out = from_dimensionless(1.0, 0.0, 0.0, 1.0, s, c)
    assert out.t == pytest.approx(s.tau_p, rel=1e-14)
    assert out.mass == pytest.approx(c.planck_mass, rel=1e-14)
    assert out.potential == 0.0
    assert from_dimensionless(math.pi, 0.0, 0.0, 1.0, s, c).t \
        == pytest.approx(math.pi * s.tau_p, rel=1e-14)
    assert from_dimensionless(0.0, 0.0, 0.5, 1.0, s, c).potential \
        == pytest.approx(c.planck_mass * c.c**2 / 2.0, rel=1e-14)


def test_round_trip_randomized():
    c = PhysicalConstants()
    s = derive_scales(c)
    rng = np.random.default_rng(42)
    for _ in range(200):
        t = 10.0 ** rng.uniform(-45, 3)
        x = 10.0 ** rng.uniform(-36, 3)
        pot = rng.uniform(-5, 5) * s.energy_p
        m = 10.0 ** rng.uniform(-3, 3) * c.planck_mass
        d = to_dimensionless(t, x, pot, m, s, c)
        back = from_dimensionless(d.t_hat, d.x_hat, d.v, d.r, s, c)
        assert back.t == pytest.approx(t, rel=1e-14)
        assert back.x == pytest.approx(x, rel=1e-14)
        assert back.potential == pytest.approx(pot, rel=1e-14, abs=1e-30)
        assert back.mass == pytest.approx(m, rel=1e-14)


def test_nonpositive_mass_rejected():
    c = PhysicalConstants()
    s = derive_scales(c)
    with pytest.raises(ValueError):
        to_dimensionless(0.0, 0.0, 0.0, 0.0, s, c)
    with pytest.raises(ValueError):
        to_dimensionless(0.0, 0.0, 0.0, -1e-9, s, c)
    with pytest.raises(ValueError):
        from_dimensionless(0.0, 0.0, 0.0, 0.0, s, c)


def test_mismatched_scales_rejected():
    c = PhysicalConstants()
    other = derive_scales(PhysicalConstants(hbar=2 * c.hbar, c=c.c,
                                            planck_mass=c.planck_mass))
    with pytest.raises(ValueError):
        to_dimensionless(1.0, 1.0, 0.0, c.planck_mass, other, c)


def test_scales_tuple_is_immutable():
    s = derive_scales(PhysicalConstants())
    assert isinstance(s, DerivedScales)
    with pytest.raises(AttributeError):
        s.tau_p = 1.0
