"""Energy spectral densities and the Cauchy-Lorentz family.

A spectral density is the probability density of energy in a given state.
All densities here are absolutely continuous and carry enough metadata
(support, tail class, an optional change of variable) for the quadrature
engine to integrate them reliably on infinite supports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

TAIL_CLASSES = ("heavy", "exponential", "compact")


@dataclass(frozen=True)
class DephasingParams:
    """Decay rate gamma > 0 (1/time) and center frequency omega0 (1/time)."""

    gamma: float
    omega0: float = 0.0

    def __post_init__(self):
        if not (self.gamma > 0):
            raise ValueError(f"gamma must be strictly positive, got {self.gamma}")
        if not math.isfinite(self.omega0):
            raise ValueError(f"omega0 must be finite, got {self.omega0}")


@dataclass(frozen=True)
class VariableChange:
    """Substitution u -> x(u) with Jacobian dx/du, mapping (u_lo, u_hi) onto the support.

    Used to turn improper integrals over heavy-tailed supports into proper
    ones.  u_of_x inverts the map so sub-intervals of the support can be
    integrated too.
    """

    u_lo: float
    u_hi: float
    x_of_u: Callable[[float], float]
    dxdu: Callable[[float], float]
    u_of_x: Callable[[float], float]


@dataclass(frozen=True)
class SpectralDensity:
    """Probability density of energy with declared support and tail class.

    Immutable after construction; evaluation is pure, so instances are safe
    for unrestricted concurrent use.
    """

    density: Callable[[float], float]
    support: tuple[float, float] = (-math.inf, math.inf)
    tail_decay: str = "heavy"
    center: float = 0.0
    change_of_variable: VariableChange | None = None
    feature_points: tuple[float, ...] = ()
    label: str = "density"
    # piecewise-linear knot table (energies, values); enables exact transforms
    table: tuple | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.support
        if not lo < hi:
            raise ValueError(f"empty support {self.support}")
        if self.tail_decay not in TAIL_CLASSES:
            raise ValueError(
                f"tail_decay must be one of {TAIL_CLASSES}, got {self.tail_decay!r}"
            )

    def __call__(self, energy):
        """Evaluate the density; zero outside the declared support."""
        lo, hi = self.support
        e = np.asarray(energy, dtype=float)
        inside = (e >= lo) & (e <= hi)
        if e.ndim == 0:
            return float(self.density(float(e))) if inside else 0.0
        out = np.zeros_like(e)
        if np.any(inside):
            vals = np.asarray([self.density(float(x)) for x in e[inside]])
            out[inside] = vals
        return out


@dataclass(frozen=True)
class InitialStateSpec:
    """A density plus an arbitrary real phase profile alpha(E).

    The wave function sqrt(density) * exp(i alpha) has unit norm whenever the
    density is normalized.  The phase is stored but never consumed by any
    model computation: the dephasing factor and the reduced state depend on
    the density alone, which makes phase invariance a testable property.
    """

    density: SpectralDensity
    phase: Callable[[float], float] = lambda energy: 0.0


def lorentzian_density(params: DephasingParams) -> SpectralDensity:
    """Cauchy-Lorentz density (gamma/2pi) / ((E - omega0)^2 + gamma^2/4) on the line.

    Its Fourier transform is the pure exponential exp(-gamma|t|/2 - i omega0 t).
    """
    gamma, omega0 = params.gamma, params.omega0
    coef = gamma / (2.0 * math.pi)
    qsq = gamma * gamma / 4.0
    half = gamma / 2.0

    def dens(e):
        delta = e - omega0
        return coef / (delta * delta + qsq)

    # E = omega0 + (gamma/2) tan(u) maps (-pi/2, pi/2) onto the line and makes
    # the Lorentzian weight constant: dens(x(u)) * dx/du = 1/pi.
    change = VariableChange(
        u_lo=-math.pi / 2.0,
        u_hi=math.pi / 2.0,
        x_of_u=lambda u: omega0 + half * math.tan(u),
        dxdu=lambda u: half / math.cos(u) ** 2,
        u_of_x=lambda x: math.atan2(x - omega0, half),
    )
    return SpectralDensity(
        density=dens,
        support=(-math.inf, math.inf),
        tail_decay="heavy",
        center=omega0,
        change_of_variable=change,
        feature_points=(omega0 - gamma, omega0, omega0 + gamma),
        label=f"lorentzian(gamma={params.gamma:g}, omega0={params.omega0:g})",
    )


def exponential_density(rate: float = 1.0) -> SpectralDensity:
    """Half-line density rate * exp(-rate * E) on [0, inf)."""
    if not (rate > 0):
        raise ValueError(f"rate must be strictly positive, got {rate}")

    def dens(e):
        return rate * math.exp(-rate * e)

    return SpectralDensity(
        density=dens,
        support=(0.0, math.inf),
        tail_decay="exponential",
        center=0.0,
        feature_points=(1.0 / rate,),
        label=f"exponential(rate={rate:g})",
    )


def table_density(
    energies, values, support: tuple[float, float] | None = None
) -> SpectralDensity:
    """Piecewise-linear density from (E, p(E)) knots on a compact support.

    Knots must be strictly increasing with non-negative values.  Outside the
    declared support the density is zero.  Fourier transforms of table
    densities are evaluated by the exact piecewise-linear formula, never by
    quadrature.
    """
    e = np.asarray(energies, dtype=float)
    p = np.asarray(values, dtype=float)
    if e.ndim != 1 or e.shape != p.shape or e.size < 2:
        raise ValueError("need matching 1-d arrays with at least two knots")
    if not np.all(np.diff(e) > 0):
        raise ValueError("knot energies must be strictly increasing")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("knot values must be finite and non-negative")
    if support is None:
        support = (float(e[0]), float(e[-1]))
    lo, hi = support
    if lo > e[0] or hi < e[-1]:
        raise ValueError("declared support must contain all knots")

    def dens(x):
        return float(np.interp(x, e, p, left=0.0, right=0.0))

    return SpectralDensity(
        density=dens,
        support=(lo, hi),
        tail_decay="compact",
        center=float(0.5 * (e[0] + e[-1])),
        feature_points=tuple(float(x) for x in e[1:-1][:20]),
        label="user-table",
        table=(e, p),
    )


def normalize_check(d: SpectralDensity, cfg=None) -> float:
    """Integral of the density over its support, via the quadrature module.

    Callers assert |result - 1| <= 1e-10 for valid densities.  A quadrature
    non-convergence surfaces as a QuadratureFailure, never as a value.
    """
    from . import oscint

    cfg = cfg or oscint.QuadratureConfig()
    lo, hi = d.support
    return oscint.mass_integral(d, lo, hi, cfg)


def half_line_mass(d: SpectralDensity, side: str, cfg=None) -> float:
    """Mass of the density on the negative or positive half-line.

    For the Lorentzian this equals 1/2 -+ arctan(2 omega0/gamma)/pi on the
    negative/positive side; the two sides always sum to one.
    """
    from . import oscint

    cfg = cfg or oscint.QuadratureConfig()
    lo, hi = d.support
    if side == "negative":
        lo, hi = lo, min(hi, 0.0)
    elif side == "positive":
        lo, hi = max(lo, 0.0), hi
    else:
        raise ValueError(f"side must be 'negative' or 'positive', got {side!r}")
    if not lo < hi:
        return 0.0
    return oscint.mass_integral(d, lo, hi, cfg)
