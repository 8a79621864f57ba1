"""Core types and exact laws shared by both particle-transport models.

Two one-dimensional models are built on these primitives:

* ``inertia`` -- a massive particle whose velocity relaxes at rate ``lam``
  toward the local wave velocity while receiving white-noise kicks;
* ``eddy`` -- a massless tracer advected by the wave plus an exponentially
  correlated (Ornstein-Uhlenbeck) random velocity with correlation time
  ``1/lam``.

With the wave switched off, both models share the same Gaussian
displacement law: the mean-square displacement over a lag ``t`` is
``cov_displacement(params, t)``.  Every drift/dispersion integral in
:mod:`stokesdrift.asymptotics` damps its oscillatory kernel by
``exp(-k^2 C(t) / 2)`` built from that function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Switch to the Taylor branch of C(t) below this value of lam*|t|.
COV_SERIES_THRESHOLD = 1e-4


class InvalidParameterError(ValueError):
    """A model parameter or argument violates its admissible range."""


@dataclass(frozen=True)
class WaveSpec:
    """One travelling-wave velocity component u*cos(k*x - omega*t + phase).

    ``phase=None`` means "draw a fresh uniform phase on [0, 2pi) for every
    trajectory"; a float pins the phase (handy for deterministic tests).
    ``omega`` may take either sign (its sign flips the drift direction);
    ``k = 0`` is tolerated only for degenerate cases whose drift is zero.
    """

    u: float
    k: float
    omega: float
    phase: float | None = None

    def __post_init__(self):
        if not (self.u >= 0.0):
            raise InvalidParameterError(f"wave amplitude u must be >= 0, got {self.u}")
        if not (self.k >= 0.0):
            raise InvalidParameterError(f"wavenumber k must be >= 0, got {self.k}")
        if not math.isfinite(self.omega):
            raise InvalidParameterError(f"angular frequency must be finite, got {self.omega}")
        if self.phase is not None and not (0.0 <= self.phase < TWO_PI):
            raise InvalidParameterError(f"fixed phase must lie in [0, 2pi), got {self.phase}")


@dataclass(frozen=True)
class ReducedParams:
    """Dimensionless model parameters shared by both models.

    ``lam`` is the inverse relaxation time (inertia model) or the inverse
    correlation time of the random forcing (eddy model); ``sigma`` sets the
    long-time diffusivity ``sigma**2 / 2``; ``epsilon`` is the dimensionless
    wave-coupling strength.  ``epsilon >= 0`` is the canonical domain, but
    negative values are accepted so the epsilon <-> -epsilon symmetry can be
    exercised directly.
    """

    lam: float
    sigma: float
    epsilon: float

    def __post_init__(self):
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise InvalidParameterError(f"lam must be positive and finite, got {self.lam}")
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise InvalidParameterError(f"sigma must be positive and finite, got {self.sigma}")
        if not math.isfinite(self.epsilon):
            raise InvalidParameterError(f"epsilon must be finite, got {self.epsilon}")


@dataclass(frozen=True)
class PhysicalParams:
    """Physical inputs (one consistent unit system) for the inertia model."""

    m: float
    b: float
    boltzmann: float
    temperature: float

    def __post_init__(self):
        for name in ("m", "b", "boltzmann", "temperature"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise InvalidParameterError(f"{name} must be positive and finite, got {value}")


def to_reduced(phys: PhysicalParams) -> tuple[float, float]:
    """Map physical parameters onto (lam, sigma).

    lam = 1/(b*m) is the velocity relaxation rate under Stokes drag;
    sigma = sqrt(2*b*K*T) gives the long-time diffusivity sigma**2/2.
    """
    lam = 1.0 / (phys.b * phys.m)
    sigma = math.sqrt(2.0 * phys.b * phys.boltzmann * phys.temperature)
    return lam, sigma


def wave_velocity(wave: WaveSpec, x, t, phi):
    """Wave velocity u*cos(k*x - omega*t + phi); broadcasts over arrays."""
    return wave.u * np.cos(wave.k * x - wave.omega * t + phi)


def cov_displacement(params: ReducedParams, t):
    """Mean-square displacement C(t) of the wave-free particle over lag t.

        C(t) = sigma^2 * (|t| + (exp(-lam |t|) - 1)/lam)

    Even in t, nonnegative, nondecreasing in |t|, and asymptotically
    sigma^2*(|t| - 1/lam).  For lam*|t| below ``COV_SERIES_THRESHOLD`` the
    closed form subtracts nearly equal quantities, so a three-term Taylor
    branch (lam*sigma^2*t^2/2)*(1 - lam|t|/3 + (lam|t|)^2/12) is used
    instead.  Accepts scalars or arrays.
    """
    lam = params.lam
    sig2 = params.sigma * params.sigma
    if np.ndim(t) == 0:
        at = lam * abs(t)
        if at < COV_SERIES_THRESHOLD:
            return 0.5 * lam * sig2 * t * t * (1.0 - at / 3.0 + at * at / 12.0)
        return sig2 * (abs(t) + math.expm1(-at) / lam)
    t = np.asarray(t, dtype=float)
    abs_t = np.abs(t)
    at = lam * abs_t
    series = 0.5 * lam * sig2 * t * t * (1.0 - at / 3.0 + at * at / 12.0)
    closed = sig2 * (abs_t + np.expm1(-at) / lam)
    return np.where(at < COV_SERIES_THRESHOLD, series, closed)


def ou_transition(u0: float, dt: float, params: ReducedParams) -> tuple[float, float]:
    """Exact transition moments of the velocity process over a step dt.

    Returns (mean, variance) of U(t+dt) given U(t) = u0:
    mean = u0*exp(-lam*dt), variance = (lam*sigma^2/2)*(1 - exp(-2*lam*dt)).
    Sampling the next velocity means drawing a Gaussian with these moments.
    """
    if dt < 0.0:
        raise InvalidParameterError(f"dt must be nonnegative, got {dt}")
    decay = math.exp(-params.lam * dt)
    mean = u0 * decay
    variance = 0.5 * params.lam * params.sigma * params.sigma * (-math.expm1(-2.0 * params.lam * dt))
    return mean, variance


def ou_stationary_std(params: ReducedParams) -> float:
    """Standard deviation sqrt(lam/2)*sigma of the stationary velocity law."""
    return params.sigma * math.sqrt(0.5 * params.lam)


def ou_stationary_sample(params: ReducedParams, rng: np.random.Generator) -> float:
    """One draw from the stationary velocity law N(0, lam*sigma^2/2)."""
    return ou_stationary_std(params) * rng.standard_normal()
