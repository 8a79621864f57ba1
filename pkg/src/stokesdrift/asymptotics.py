"""Leading-order drift and dispersion formulas, evaluated by quadrature.

Every quantity here reduces to a semi-infinite integral of a smooth,
exponentially decaying envelope against sin(omega*t) or cos(omega*t):

    drift (eddy):     V = (eps^2 u^2 k / 2) * Int envelope(t) sin(omega t) dt,
                      envelope(t) = exp(-k^2 C(t) / 2)
    drift (inertia):  same with envelope multiplied by (1 - exp(-lam t))
    variance (eddy):  sigma^2 + eps^2 u^2 * Int envelope(t) cos(omega t) dt

with C(t) the wave-free mean-square displacement from
:mod:`stokesdrift.model`.  The shared engine :func:`quad_osc_decay`
truncates the domain where the envelope's decay exponent reaches
``envelope_cutoff``, tiles it with panels narrow enough to resolve both the
oscillation and the decay, applies 15-point Gauss-Legendre per panel, and
certifies the result by panel-count doubling.

``drift_inertia`` uses a one-dimensional reduction of the model's double
integral; ``drift_inertia_2d`` evaluates the double integral directly
(iterated adaptive quadrature, scipy) and exists purely to validate the
reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import integrate

from .model import InvalidParameterError, ReducedParams, WaveSpec, cov_displacement

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)
_PANEL_SLAB = 1 << 16  # panels evaluated per vectorised slab


class QuadratureAccuracyError(RuntimeError):
    """The panel budget ran out before the requested tolerance was met."""

    def __init__(self, message: str, best_value: float, error_estimate: float):
        super().__init__(message)
        self.best_value = best_value
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances and budgets for the oscillatory-decay quadrature engine."""

    rel_tol: float = 1e-8
    envelope_cutoff: float = 40.0
    max_panels: int = 1_000_000

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-4):
            raise InvalidParameterError(f"rel_tol must lie in (0, 1e-4], got {self.rel_tol}")
        if not (self.envelope_cutoff >= 30.0):
            raise InvalidParameterError(f"envelope_cutoff must be >= 30, got {self.envelope_cutoff}")
        if not (self.max_panels >= 1000):
            raise InvalidParameterError(f"max_panels must be >= 1000, got {self.max_panels}")


DEFAULT_SETTINGS = QuadratureSettings()


@dataclass(frozen=True)
class DriftValue:
    """A drift velocity with its provenance and quadrature error bound."""

    value: float
    model: str  # "inertia" | "eddy" | "classical-limit"
    params: ReducedParams
    wave: WaveSpec
    error: float = 0.0

    def __post_init__(self):
        if not (self.error >= 0.0):
            raise InvalidParameterError(f"error estimate must be >= 0, got {self.error}")


def quad_osc_decay(
    envelope: Callable[[np.ndarray], np.ndarray],
    omega: float,
    kind: str,
    settings: QuadratureSettings | None = None,
    *,
    decay_rate: float,
    decay_start: float = 0.0,
) -> tuple[float, float]:
    """Integrate envelope(t)*sin(omega*t) (or cos) over [0, infinity).

    The envelope must be smooth, positive, and eventually bounded by
    A*exp(-decay_rate*(t - decay_start)); the domain is truncated at
    T_max = envelope_cutoff/decay_rate + decay_start, where that bound's
    exponent reaches the cutoff.  Panels no wider than a quarter of
    min(half oscillation period, envelope e-folding time) are integrated
    with fixed 15-point Gauss-Legendre; the value is accepted once doubling
    the panel count moves it by at most rel_tol (relatively), and that
    movement is returned as a conservative error estimate.

    Raises :class:`QuadratureAccuracyError` (carrying the best estimate) if
    the tolerance is not certified within ``max_panels`` panels.
    """
    if settings is None:
        settings = DEFAULT_SETTINGS
    if kind not in ("sin", "cos"):
        raise InvalidParameterError(f"kind must be 'sin' or 'cos', got {kind!r}")
    if not (decay_rate > 0.0):
        raise InvalidParameterError(f"decay_rate must be positive, got {decay_rate}")
    if omega == 0.0 and kind == "sin":
        return 0.0, 0.0

    t_max = settings.envelope_cutoff / decay_rate + decay_start
    half_period = math.pi / abs(omega) if omega != 0.0 else math.inf
    width = min(half_period, 1.0 / decay_rate) / 4.0
    osc = np.sin if kind == "sin" else np.cos

    def composite(n_panels: int) -> float:
        edges = np.linspace(0.0, t_max, n_panels + 1)
        total = 0.0
        for lo in range(0, n_panels, _PANEL_SLAB):
            hi = min(lo + _PANEL_SLAB, n_panels)
            half = 0.5 * (edges[lo + 1 : hi + 1] - edges[lo:hi])
            mid = 0.5 * (edges[lo + 1 : hi + 1] + edges[lo:hi])
            nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
            vals = envelope(nodes) * osc(omega * nodes)
            total += float(np.sum((vals * _GL_WEIGHTS).sum(axis=1) * half))
        return total

    n = min(max(16, math.ceil(t_max / width)), settings.max_panels)
    value = composite(n)
    err = math.inf
    while 2 * n <= settings.max_panels:
        refined = composite(2 * n)
        err = abs(refined - value)
        value = refined
        n *= 2
        if err <= settings.rel_tol * abs(value) or err == 0.0:
            return value, err
    raise QuadratureAccuracyError(
        f"no convergence to rel_tol={settings.rel_tol:g} within {settings.max_panels} panels",
        best_value=value,
        error_estimate=err,
    )


def _damping_envelope(params: ReducedParams, wave: WaveSpec):
    """exp(-k^2 C(t)/2): the Gaussian damping of the wave's phase coherence."""
    half_k2 = 0.5 * wave.k * wave.k

    def envelope(t):
        return np.exp(-half_k2 * cov_displacement(params, t))

    return envelope


def _decay_rate(params: ReducedParams, wave: WaveSpec) -> float:
    """Large-t decay rate k^2 sigma^2 / 2 of the damping envelope."""
    return 0.5 * wave.k * wave.k * params.sigma * params.sigma


def drift_eddy(
    params: ReducedParams, wave: WaveSpec, settings: QuadratureSettings | None = None
) -> DriftValue:
    """Leading-order drift for the correlated-forcing (eddy) model.

    V = (eps^2 u^2 k / 2) * Int_0^inf sin(omega t) exp(-k^2 C(t)/2) dt.
    """
    prefactor = 0.5 * params.epsilon**2 * wave.u**2 * wave.k
    if prefactor == 0.0 or wave.omega == 0.0:
        return DriftValue(0.0, "eddy", params, wave)
    integral, err = quad_osc_decay(
        _damping_envelope(params, wave),
        wave.omega,
        "sin",
        settings,
        decay_rate=_decay_rate(params, wave),
        decay_start=1.0 / params.lam,
    )
    return DriftValue(prefactor * integral, "eddy", params, wave, abs(prefactor) * err)


def drift_inertia(
    params: ReducedParams, wave: WaveSpec, settings: QuadratureSettings | None = None
) -> DriftValue:
    """Leading-order drift for the inertial-particle model.

    Evaluates the one-dimensional reduction

        V = (eps^2 u^2 k / 2) *
            Int_0^inf (1 - exp(-lam s)) exp(-k^2 C(s)/2) sin(omega s) ds,

    obtained from the model's double integral over (alpha, beta) by
    substituting s = alpha + beta and integrating lam*exp(-lam*beta) over
    beta in [0, s].  The reduction is validated against
    :func:`drift_inertia_2d` in the test suite.
    """
    prefactor = 0.5 * params.epsilon**2 * wave.u**2 * wave.k
    if prefactor == 0.0 or wave.omega == 0.0:
        return DriftValue(0.0, "inertia", params, wave)
    damping = _damping_envelope(params, wave)
    lam = params.lam

    def envelope(t):
        return -np.expm1(-lam * t) * damping(t)

    integral, err = quad_osc_decay(
        envelope,
        wave.omega,
        "sin",
        settings,
        decay_rate=_decay_rate(params, wave),
        decay_start=1.0 / lam,
    )
    return DriftValue(prefactor * integral, "inertia", params, wave, abs(prefactor) * err)


def drift_inertia_2d(
    params: ReducedParams, wave: WaveSpec, settings: QuadratureSettings | None = None
) -> DriftValue:
    """Inertial drift from the double integral, without the 1-D reduction.

    V = (eps^2 lam u^2 k / 2) *
        Int_0^inf Int_0^inf exp(-lam b - k^2 C(a+b)/2) sin(omega (a+b)) da db

    evaluated as iterated adaptive quadrature on the truncated quadrant
    (oscillatory-weight rule inside, plain adaptive rule outside).  Slower
    than :func:`drift_inertia`; used as the reduction oracle.
    """
    if settings is None:
        settings = DEFAULT_SETTINGS
    prefactor = 0.5 * params.epsilon**2 * params.lam * wave.u**2 * wave.k
    if prefactor == 0.0 or wave.omega == 0.0:
        return DriftValue(0.0, "inertia", params, wave)
    lam = params.lam
    omega = wave.omega
    half_k2 = 0.5 * wave.k * wave.k
    rate = _decay_rate(params, wave)
    a_max = settings.envelope_cutoff / rate + 1.0 / lam
    b_max = (settings.envelope_cutoff + rate / lam) / (lam + rate)

    def damping(s: float) -> float:
        return math.exp(-half_k2 * cov_displacement(params, s))

    def inner(b: float) -> float:
        # sin(omega*(a+b)) split into the two oscillatory-weight integrals in a
        s_part, _ = integrate.quad(
            lambda a: damping(a + b), 0.0, a_max, weight="sin", wvar=omega,
            epsabs=1e-13, epsrel=1e-10, limit=500,
        )
        c_part, _ = integrate.quad(
            lambda a: damping(a + b), 0.0, a_max, weight="cos", wvar=omega,
            epsabs=1e-13, epsrel=1e-10, limit=500,
        )
        return math.cos(omega * b) * s_part + math.sin(omega * b) * c_part

    outer, outer_err = integrate.quad(
        lambda b: math.exp(-lam * b) * inner(b), 0.0, b_max,
        epsabs=1e-13, epsrel=1e-10, limit=500,
    )
    return DriftValue(prefactor * outer, "inertia", params, wave, abs(prefactor) * outer_err)


def drift_classical(params: ReducedParams, wave: WaveSpec) -> DriftValue:
    """Closed-form drift of the zero-mass / short-correlation limit.

    Both models reduce, for lam -> infinity, to
    V = (eps^2 u^2 k / 2) * omega / (a^2 + omega^2) with a = k^2 sigma^2 / 2.
    """
    prefactor = 0.5 * params.epsilon**2 * wave.u**2 * wave.k
    if prefactor == 0.0:
        return DriftValue(0.0, "classical-limit", params, wave)
    a = 0.5 * wave.k * wave.k * params.sigma * params.sigma
    return DriftValue(prefactor * wave.omega / (a * a + wave.omega * wave.omega),
                      "classical-limit", params, wave)


def variance_rate_eddy(
    params: ReducedParams, wave: WaveSpec, settings: QuadratureSettings | None = None
) -> float:
    """Long-time variance growth rate lim Var[X_t]/t for the eddy model.

    sigma^2 + eps^2 u^2 * Int_0^inf cos(omega t) exp(-k^2 C(t)/2) dt,
    to leading order in the wave coupling.
    """
    sig2 = params.sigma * params.sigma
    amp2 = params.epsilon**2 * wave.u**2
    if amp2 == 0.0:
        return sig2
    if wave.k == 0.0:
        raise InvalidParameterError("variance correction is undamped for k = 0")
    integral, _ = quad_osc_decay(
        _damping_envelope(params, wave),
        wave.omega,
        "cos",
        settings,
        decay_rate=_decay_rate(params, wave),
        decay_start=1.0 / params.lam,
    )
    return sig2 + amp2 * integral


def variance_rate_classical(params: ReducedParams, wave: WaveSpec) -> float:
    """lam -> infinity limit of the eddy variance rate (closed form).

    sigma^2 + eps^2 * 2 u^2 k^2 sigma^2 / (k^4 sigma^4 + 4 omega^2).
    """
    sig2 = params.sigma * params.sigma
    numerator = params.epsilon**2 * 2.0 * wave.u**2 * wave.k**2 * sig2
    if numerator == 0.0:
        return sig2
    return sig2 + numerator / (wave.k**4 * sig2 * sig2 + 4.0 * wave.omega**2)


@dataclass(frozen=True)
class PeakResult:
    """Outcome of a drift-versus-lam maximisation over a bracket."""

    lambda_star: float
    drift: float
    interior: bool  # False when the maximum sits at a bracket endpoint


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def find_drift_peak(
    model: str,
    base_params: ReducedParams,
    wave: WaveSpec,
    lambda_range: tuple[float, float],
    settings: QuadratureSettings | None = None,
    grid_points: int = 40,
    lambda_rel_tol: float = 1e-4,
) -> PeakResult:
    """Locate the drift maximum over lam in [lo, hi].

    A ``grid_points``-point logarithmic scan brackets the maximum; if it
    sits at an endpoint the result is flagged non-interior, otherwise a
    golden-section refinement in log(lam) narrows it to ``lambda_rel_tol``
    relative accuracy.
    """
    if model == "eddy":
        drift_fn = drift_eddy
    elif model == "inertia":
        drift_fn = drift_inertia
    else:
        raise InvalidParameterError(f"model must be 'inertia' or 'eddy', got {model!r}")
    lo, hi = lambda_range
    if not (0.0 < lo <= hi):
        raise InvalidParameterError(f"need 0 < lambda_lo <= lambda_hi, got ({lo}, {hi})")

    def value(lam: float) -> float:
        return drift_fn(replace(base_params, lam=lam), wave, settings).value

    if lo == hi:
        return PeakResult(lo, value(lo), False)

    grid = np.geomspace(lo, hi, grid_points)
    drifts = [value(lam) for lam in grid]
    i_max = int(np.argmax(drifts))
    if i_max == 0 or i_max == len(grid) - 1:
        return PeakResult(float(grid[i_max]), drifts[i_max], False)

    a = math.log(grid[i_max - 1])
    b = math.log(grid[i_max + 1])
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = value(math.exp(c))
    fd = value(math.exp(d))
    while b - a > lambda_rel_tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = value(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = value(math.exp(d))
    lam_star = math.exp(0.5 * (a + b))
    return PeakResult(lam_star, value(lam_star), True)
