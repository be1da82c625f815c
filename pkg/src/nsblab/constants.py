"""Physical constants, Planck-scale reference values, and unit conversion.

Everything downstream works in dimensionless Planck-scale variables: time in
units of tau_p = hbar / (M_p c^2), length in units of l_p = c * tau_p,
potential energy in units of E_p = M_p c^2, and mass through the ratio
r = M_p / m.  This module owns the physical-to-dimensionless boundary; the
rest of the package never sees SI quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

# CODATA 2018 recommended values (SI).
HBAR_SI = 1.054571817e-34  # J s
C_SI = 2.99792458e8  # m / s
PLANCK_MASS_SI = 2.176434e-8  # kg

# Exact by SI definition: 1 GeV in joules.
JOULES_PER_GEV = 1.602176634e-10


def _require_positive_finite(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class PhysicalConstants:
    """The three inputs every derived scale is built from.

    Defaults are the CODATA SI values.  Use :meth:`natural_units` for the
    internal hbar = c = M_p = 1 system.
    """

    hbar: float = HBAR_SI
    c: float = C_SI
    planck_mass: float = PLANCK_MASS_SI

    def __post_init__(self) -> None:
        _require_positive_finite("hbar", self.hbar)
        _require_positive_finite("c", self.c)
        _require_positive_finite("planck_mass", self.planck_mass)

    @classmethod
    def natural_units(cls) -> "PhysicalConstants":
        return cls(hbar=1.0, c=1.0, planck_mass=1.0)


@dataclass(frozen=True)
class DerivedScales:
    """Planck-scale reference quantities derived from a constants set.

    Attributes
    ----------
    tau_p:
        Reference time hbar / (M_p c^2), seconds.
    length_p:
        Reference length c * tau_p, metres.
    energy_p:
        Reference energy M_p c^2, joules.
    energy_p_gev:
        Same energy expressed in GeV.
    omega:
        Reference angular frequency 1 / tau_p.  Note the free uniform
        solution oscillates at twice this (see the analytic module).
    period:
        Oscillation period of the free uniform solution, pi * tau_p.
    """

    tau_p: float
    length_p: float
    energy_p: float
    energy_p_gev: float
    omega: float
    period: float


def derive_scales(constants: PhysicalConstants = PhysicalConstants()) -> DerivedScales:
    """Compute the Planck-scale reference quantities for ``constants``."""
    energy_p = constants.planck_mass * constants.c**2
    tau_p = constants.hbar / energy_p
    return DerivedScales(
        tau_p=tau_p,
        length_p=constants.c * tau_p,
        energy_p=energy_p,
        energy_p_gev=energy_p / JOULES_PER_GEV,
        omega=1.0 / tau_p,
        period=math.pi * tau_p,
    )


class DimensionlessInputs(NamedTuple):
    t_hat: float
    x_hat: float
    v: float
    r: float


class PhysicalInputs(NamedTuple):
    t: float
    x: float
    potential: float
    mass: float


def _check_scales(scales: DerivedScales, constants: PhysicalConstants) -> None:
    # Guard against mixing scales derived from a different constants set.
    expected = constants.hbar / (constants.planck_mass * constants.c**2)
    if abs(scales.tau_p - expected) > 1e-12 * expected:
        raise ValueError("scales were not derived from the given constants")


def to_dimensionless(
    t: float,
    x: float,
    potential: float,
    mass: float,
    scales: DerivedScales,
    constants: PhysicalConstants = PhysicalConstants(),
) -> DimensionlessInputs:
    """Map SI inputs (t, x, V, m) to (t_hat, x_hat, v, r).

    ``t_hat = t / tau_p``, ``x_hat = x / length_p``, ``v = V / E_p`` and
    ``r = M_p / m``.
    """
    _check_scales(scales, constants)
    _require_positive_finite("mass", mass)
    if not (math.isfinite(t) and math.isfinite(x) and math.isfinite(potential)):
        raise ValueError("t, x and potential must be finite")
    return DimensionlessInputs(
        t_hat=t / scales.tau_p,
        x_hat=x / scales.length_p,
        v=potential / scales.energy_p,
        r=constants.planck_mass / mass,
    )


def from_dimensionless(
    t_hat: float,
    x_hat: float,
    v: float,
    r: float,
    scales: DerivedScales,
    constants: PhysicalConstants = PhysicalConstants(),
) -> PhysicalInputs:
    """Inverse of :func:`to_dimensionless`."""
    _check_scales(scales, constants)
    _require_positive_finite("r", r)
    if not (math.isfinite(t_hat) and math.isfinite(x_hat) and math.isfinite(v)):
        raise ValueError("t_hat, x_hat and v must be finite")
    return PhysicalInputs(
        t=t_hat * scales.tau_p,
        x=x_hat * scales.length_p,
        potential=v * scales.energy_p,
        mass=constants.planck_mass / r,
    )
