"""Affine-invariant energies built from directional energy profiles.

The plain semi-norm integrates directional energies over the sphere; the
affine energy replaces that arithmetic mean with a power-type mean whose
exponent -N/(sp) makes the result invariant under volume-preserving linear
substitutions.  Both are instances of one construction: push the profile
through a bijection Psi, average, pull back, and scale by the sphere area.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fields import NumericalFailureError, SmoothnessParams
from .quadrature import QuadratureBundle
from .seminorms import DirectionalEnergyProfile, directional_profile, seminorm, starred_seminorm


@dataclass(frozen=True)
class PsiSpec:
    """Bijection of [0, inf] used to aggregate a directional profile.

    psi and psi_inverse are vectorized evaluators on (0, inf).  convex marks
    specs whose psi is convex (enables the mean comparison checks);
    singular_at_zero marks specs with psi_inverse(0) = inf, which is the
    extended-arithmetic convention that sends profiles with a dead direction
    to energy zero.
    """

    psi: Callable[[np.ndarray], np.ndarray]
    psi_inverse: Callable[[np.ndarray], np.ndarray]
    convex: bool = False
    singular_at_zero: bool = False

    @classmethod
    def identity(cls) -> "PsiSpec":
        return cls(lambda x: x, lambda x: x, convex=True)

    @classmethod
    def power(cls, s: float, p: float, dimension: int) -> "PsiSpec":
        """x -> x^(-sp/N), the exponent that buys affine invariance."""
        expo = -s * p / dimension
        return cls(lambda x: np.asarray(x, dtype=float) ** expo,
                   lambda x: np.asarray(x, dtype=float) ** (1.0 / expo),
                   convex=True, singular_at_zero=True)

    def validate(self, grid: np.ndarray | None = None) -> None:
        """Round-trip and convexity spot checks on a positive test grid."""
        if grid is None:
            grid = np.geomspace(1e-3, 1e3, 61)
        grid = np.asarray(grid, dtype=float)
        back = self.psi(self.psi_inverse(grid))
        if np.max(np.abs(back - grid) / grid) > 1e-9:
            raise ValueError("psi and psi_inverse do not invert each other")
        if self.convex:
            vals = self.psi(grid)
            second = vals[2:] - 2.0 * vals[1:-1] + vals[:-2]
            if np.min(second) < -1e-9 * max(1.0, np.max(np.abs(vals))):
                raise ValueError("psi fails the convexity check")


@dataclass(frozen=True)
class EnergyResult:
    """Value of an aggregated energy plus its profile diagnostics.

    degenerate is set exactly when some profile node carried zero energy (or
    the aggregation overflowed, which is the same thing at float precision);
    under the power-type psi that sends the value to 0.  tail_budget is the
    sphere-integrated radial truncation width of the underlying profile.
    resolution_drift is stamped only when a doubled-resolution monitor ran.
    """

    value: float
    degenerate: bool
    tail_budget: float
    resolution_drift: float | None = None


def _aggregate(profile: DirectionalEnergyProfile, psi: PsiSpec,
               params: SmoothnessParams) -> EnergyResult:
    area = profile.sphere.area
    tail = profile.tail_budget()
    if psi.singular_at_zero and profile.degenerate:
        return EnergyResult(0.0, True, tail)
    with np.errstate(divide="ignore", over="ignore"):
        transformed = psi.psi_inverse(profile.values)
    if not np.all(np.isfinite(transformed)):
        if psi.singular_at_zero:
            return EnergyResult(0.0, True, tail)
        raise NumericalFailureError("psi_inverse undefined at a profile value")
    mean = profile.sphere.integrate(transformed) / area
    power_p = area * float(psi.psi(np.asarray(mean)))
    if not np.isfinite(power_p) or power_p < 0:
        raise NumericalFailureError("aggregated energy is not finite")
    return EnergyResult(power_p ** (1.0 / params.p), profile.degenerate, tail)


def psi_energy(field, params: SmoothnessParams, psi: PsiSpec,
               quads: QuadratureBundle, *,
               profile: DirectionalEnergyProfile | None = None) -> EnergyResult:
    """Energy with p-th power  sigma_N * psi(mean of psi_inverse(D(f, .))).

    psi = identity recovers the semi-norm (difference branch) or its
    sphere-integrated variant (derivative branch); psi = the -sp/N power
    recovers the affine energy.
    """
    if profile is None:
        profile = directional_profile(field, params, quads)
    return _aggregate(profile, psi, params)


def affine_energy(field, params: SmoothnessParams, quads: QuadratureBundle, *,
                  profile: DirectionalEnergyProfile | None = None,
                  monitor_resolution: bool = False) -> EnergyResult:
    """The affine-invariant energy

        sigma_N^{(N+sp)/(Np)} * (int_S D(f, xi)^{-N/(sp)} dsigma)^{-s/N}.

    A profile with a dead direction yields value 0 with the degenerate flag
    (the sphere integral diverges under the negative power).  With
    monitor_resolution the sphere rule is doubled once and the relative
    difference is stamped on the result.
    """
    if profile is None:
        profile = directional_profile(field, params, quads)
    spec = PsiSpec.power(params.s, params.p, quads.dimension)
    result = _aggregate(profile, spec, params)
    if not monitor_resolution:
        return result
    fine = QuadratureBundle(quads.dimension, 2 * quads.sphere_resolution,
                            quads.box_nodes, quads.box_half_width,
                            quads.radial_spec)
    fine_profile = directional_profile(field, params, fine)
    fine_result = _aggregate(fine_profile, spec, params)
    drift = 0.0
    if fine_result.value > 0:
        drift = abs(result.value - fine_result.value) / fine_result.value
    return EnergyResult(result.value, result.degenerate, result.tail_budget,
                        resolution_drift=drift)


def jensen_gap(field, params: SmoothnessParams, quads: QuadratureBundle, *,
               profile: DirectionalEnergyProfile | None = None) -> float:
    """Semi-norm (sphere-integrated variant on the derivative branch) minus
    the affine energy.  Nonnegative up to quadrature noise, and zero exactly
    when the profile is constant, i.e. for radial fields."""
    if profile is None:
        profile = directional_profile(field, params, quads)
    energy = affine_energy(field, params, quads, profile=profile)
    if params.fractional:
        base = seminorm(field, params, quads, profile=profile)
    else:
        base = starred_seminorm(field, int(round(params.s)), params.p, quads,
                                profile=profile)
    return base - energy.value
