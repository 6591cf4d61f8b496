"""Generalized monotone potentials and the transported exponential state.

Replacing the ramp couplings by multiplication with V(x) and V(-x), for any
absolutely continuous non-negative V that is non-decreasing and strictly
increasing on the positive half-line, leaves the reduced dynamics an exact
phase-damping channel with factor f(t) = int exp(-i t W(x)) |phi(x)|^2 dx,
where W(x) = V(x) - V(-x) is strictly increasing and odd.

Choosing the continuum state so that W pushes its density forward onto the
Cauchy-Lorentz density, i.e.

    |phi(x)|^2 = W'(x) * p_C(W(x)),

the substitution u = W(x) reduces f(t) to the plain Lorentzian transform and
the factor is again the pure exponential exp(-gamma|t|/2 - i omega0 t).
(The other transport direction, p_C(W^{-1}(x)) / W'(W^{-1}(x)), is sometimes
quoted for this construction but does not reproduce the exponential: under
u = W(x) it leaves exp(-i t W(W(y))) in the integrand.)

W has range R only when V is unbounded on the positive half-line; bounded
potentials are rejected at bracket-expansion failure rather than silently
truncated, since the construction needs a global inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import oscint
from .oscint import QuadratureConfig
from .spectral import DephasingParams, InitialStateSpec, SpectralDensity, VariableChange, lorentzian_density

_CHECK_GRID = np.linspace(-30.0, 30.0, 1001)
_FD_STEP = 1e-6
_BISECT_TOL = 1e-12
_MAX_DOUBLINGS = 200


class MonotonicityError(ValueError):
    """V violates non-negativity or monotonicity; carries the violating pair."""

    def __init__(self, message: str, pair: tuple[float, float] | None = None):
        super().__init__(message)
        self.pair = pair


class RangeError(ValueError):
    """W does not reach the requested value: bracket expansion exhausted."""


@dataclass(frozen=True)
class MonotonePotential:
    """A validated potential V with its induced odd map W and inverse.

    Immutable after construction (the inverse's bracket ladder is prepared
    eagerly); all evaluations are pure, so instances are safe for
    unrestricted concurrent use.
    """

    V: Callable[[float], float]
    V_prime: Callable[[float], float] | None
    W: Callable[[float], float]
    W_prime: Callable[[float], float]
    W_inverse: Callable[[float], float]
    label: str = "potential"

    @property
    def has_analytic_derivative(self) -> bool:
        return self.V_prime is not None


def _eval_or_raise(V, x: float) -> float:
    v = float(V(x))
    if not math.isfinite(v):
        raise MonotonicityError(f"V({x:g}) is not finite")
    return v


def induced_map(
    V: Callable[[float], float],
    V_prime: Callable[[float], float] | None = None,
    label: str = "potential",
) -> MonotonePotential:
    """Validate V on a 1001-point grid over [-30, 30] and build the bundle.

    Rejects negative values, any decrease, and non-strict growth on the
    positive half-line, reporting the violating pair.  W' comes from the
    analytic V' when supplied and otherwise from a symmetric difference with
    step 1e-6 * max(1, |x|).  The inverse uses doubling bracket expansion
    from [-1, 1] (at most 200 doublings) followed by bisection to 1e-12,
    polished by one Newton step when the derivative is analytic.
    """
    vals = np.array([_eval_or_raise(V, float(x)) for x in _CHECK_GRID])
    if np.any(vals < 0):
        i = int(np.argmin(vals))
        raise MonotonicityError(
            f"V must be non-negative: V({_CHECK_GRID[i]:g}) = {vals[i]:g}",
            pair=(float(_CHECK_GRID[i]), float(vals[i])),
        )
    diffs = np.diff(vals)
    scale = max(1.0, float(np.max(np.abs(vals))))
    bad = np.where(diffs < -1e-12 * scale)[0]
    if bad.size:
        i = int(bad[0])
        raise MonotonicityError(
            f"V must be non-decreasing: V({_CHECK_GRID[i]:g}) = {vals[i]:g} "
            f"> V({_CHECK_GRID[i+1]:g}) = {vals[i+1]:g}",
            pair=(float(_CHECK_GRID[i]), float(_CHECK_GRID[i + 1])),
        )
    pos = _CHECK_GRID[:-1] >= 0
    flat = np.where(pos & (diffs <= 0))[0]
    if flat.size:
        i = int(flat[0])
        raise MonotonicityError(
            f"V must be strictly increasing on the positive half-line: "
            f"V({_CHECK_GRID[i]:g}) = V({_CHECK_GRID[i+1]:g}) = {vals[i]:g}",
            pair=(float(_CHECK_GRID[i]), float(_CHECK_GRID[i + 1])),
        )

    def W(x: float) -> float:
        return V(x) - V(-x)

    if V_prime is not None:

        def W_prime(x: float) -> float:
            return V_prime(x) + V_prime(-x)

    else:

        def W_prime(x: float) -> float:
            h = _FD_STEP * max(1.0, abs(x))
            return (W(x + h) - W(x - h)) / (2.0 * h)

    def _w_guarded(x: float) -> float:
        # fast-growing potentials overflow the float range; the sign of the
        # overflow is pinned by monotonicity, so brackets stay usable
        try:
            v = W(x)
        except OverflowError:
            return math.inf if x > 0 else -math.inf
        if math.isnan(v):
            raise RangeError(f"W({x:g}) evaluated to NaN")
        return v

    def W_inverse(y: float) -> float:
        if not math.isfinite(y):
            raise ValueError(f"W_inverse needs a finite target, got {y}")
        lo, hi = -1.0, 1.0
        doublings = 0
        while _w_guarded(hi) < y:
            hi *= 2.0
            doublings += 1
            if doublings > _MAX_DOUBLINGS:
                raise RangeError(
                    f"W never reaches {y:g}: bracket expansion failed after "
                    f"{_MAX_DOUBLINGS} doublings (bounded potential?)"
                )
        while _w_guarded(lo) > y:
            lo *= 2.0
            doublings += 1
            if doublings > _MAX_DOUBLINGS:
                raise RangeError(
                    f"W never reaches {y:g}: bracket expansion failed after "
                    f"{_MAX_DOUBLINGS} doublings (bounded potential?)"
                )
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            w_mid = _w_guarded(mid)
            if w_mid == y:
                lo = hi = mid
                break
            if w_mid < y:
                lo = mid
            else:
                hi = mid
            if hi - lo <= _BISECT_TOL * max(1.0, abs(lo), abs(hi)):
                break
        x = 0.5 * (lo + hi)
        if V_prime is not None:
            slope = W_prime(x)
            if slope > 0 and math.isfinite(slope):
                step = (_w_guarded(x) - y) / slope
                if math.isfinite(step) and abs(step) < max(1.0, abs(x)):
                    x -= step
        return x

    return MonotonePotential(V, V_prime, W, W_prime, W_inverse, label)


def ramp_potential() -> MonotonePotential:
    """V(x) = max(x, 0); the induced map is the identity."""
    return induced_map(
        lambda x: max(x, 0.0),
        # symmetric subgradient at 0 keeps W' = 1 everywhere
        lambda x: 1.0 if x > 0 else (0.5 if x == 0 else 0.0),
        label="ramp",
    )


def exp_potential() -> MonotonePotential:
    """V(x) = exp(x); the induced map is W(x) = 2 sinh(x)."""
    return induced_map(math.exp, math.exp, label="exp")


def build_initial_state(p: MonotonePotential, params: DephasingParams) -> InitialStateSpec:
    """Continuum state whose density W pushes forward onto the Lorentzian:
    |phi(x)|^2 = W'(x) * p_C(W(x)).

    Normalization is inherited from the change-of-variables identity; the
    attached substitution (the Lorentzian angle variable transported through
    W^{-1}) makes mass integrals proper regardless of how fast V grows.
    """
    lor = lorentzian_density(params)
    w, w_prime, w_inv = p.W, p.W_prime, p.W_inverse

    def dens(x: float) -> float:
        slope = w_prime(x)
        if not math.isfinite(slope) or slope < -1e-9:
            raise ValueError(f"W'({x:g}) = {slope} is not a usable Jacobian")
        return max(slope, 0.0) * lor.density(w(x))

    base = lor.change_of_variable
    change = VariableChange(
        u_lo=base.u_lo,
        u_hi=base.u_hi,
        x_of_u=lambda u: w_inv(base.x_of_u(u)),
        dxdu=lambda u: base.dxdu(u) / w_prime(w_inv(base.x_of_u(u))),
        u_of_x=lambda x: base.u_of_x(w(x)),
    )
    center = w_inv(params.omega0)
    features = tuple(w_inv(e) for e in lor.feature_points)
    return InitialStateSpec(
        density=SpectralDensity(
            density=dens,
            support=(-math.inf, math.inf),
            tail_decay="heavy",
            center=center,
            change_of_variable=change,
            feature_points=features,
            label=f"transported({p.label}, gamma={params.gamma:g}, omega0={params.omega0:g})",
        )
    )


def generalized_dephasing_factor(
    p: MonotonePotential,
    params: DephasingParams,
    t: float,
    cfg: QuadratureConfig,
    state: InitialStateSpec | None = None,
) -> complex:
    """f(t) = int exp(-i t W(x)) |phi(x)|^2 dx by direct x-space quadrature.

    The oscillation cells are half-periods of the phase t*W(x), located via
    W^{-1}; the integrand is evaluated entirely in x.  Equals the pure
    exponential exp(-gamma|t|/2 - i omega0 t) within the quadrature
    tolerance when phi is the transported state.
    """
    state = state or build_initial_state(p, params)
    d = state.density
    if t == 0:
        return complex(oscint.mass_integral(d, -math.inf, math.inf, cfg))
    return oscint.phase_fourier(
        d.density,
        t,
        cfg,
        split=d.center,
        phase=p.W,
        phase_inv=p.W_inverse,
        points=d.feature_points,
    )


def generalized_factor_series(
    p: MonotonePotential,
    params: DephasingParams,
    times,
    cfg: QuadratureConfig,
    state: InitialStateSpec | None = None,
):
    """generalized_dephasing_factor on a time grid, with SeriesFailure semantics."""
    state = state or build_initial_state(p, params)
    return oscint._batch(
        lambda t: generalized_dephasing_factor(p, params, t, cfg, state),
        times,
        state.density,
        cfg,
        "generalized_dephasing_factor",
        {"potential": p.label},
    )
