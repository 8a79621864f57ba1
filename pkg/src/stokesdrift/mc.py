"""Monte Carlo integration of the two wave-driven particle models.

The coupled systems are

    inertia:  dU = -lam (U - eps f(X, t)) dt + lam sigma dB,   dX = U dt
    eddy:     dU = -lam U dt + lam sigma dB,   dX = (U + eps f(X, t)) dt

with f the travelling-wave velocity.  Trajectories start from X = 0 and a
stationary velocity draw, with a fresh uniform wave phase unless the wave
pins one, and are advanced with the stochastic Euler scheme (scheme
``"euler"``) or with the exact Ornstein-Uhlenbeck velocity transition
(``"exact-ou-splitting"``, a cross-check for time-stepping bias).

Reproducibility contract: trajectory ``i`` owns the counter-based random
stream ``rng_stream(master_seed, i)`` and consumes it in a fixed order
(phase draw if the policy is uniform, stationary velocity, then one
standard normal per step).  Trajectories are advanced vectorised in
fixed-size batches whose composition does not depend on the worker count,
so ensembles are bit-identical however the work is scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from .model import (
    TWO_PI,
    InvalidParameterError,
    ReducedParams,
    WaveSpec,
    ou_stationary_std,
    ou_transition,
    wave_velocity,
)

MODELS = ("inertia", "eddy")
SCHEMES = ("euler", "exact-ou-splitting")

_CHUNK = 256  # trajectories advanced together; fixed so results never depend on scheduling
_NOISE_BLOCK = 8192  # steps per noise block


class DivergenceError(RuntimeError):
    """A trajectory left the finite range (time step too large / bad params)."""


@dataclass(frozen=True)
class SimConfig:
    """Ensemble simulation settings."""

    dt: float
    t_total: float
    n_traj: int
    master_seed: int
    model: str
    scheme: str = "euler"

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise InvalidParameterError(f"dt must be positive, got {self.dt}")
        if not (self.t_total >= self.dt):
            raise InvalidParameterError(f"t_total must be >= dt, got {self.t_total}")
        if not (self.n_traj >= 1):
            raise InvalidParameterError(f"n_traj must be >= 1, got {self.n_traj}")
        if not (0 <= int(self.master_seed) < 2**64):
            raise InvalidParameterError(f"master_seed must be a 64-bit unsigned int, got {self.master_seed}")
        if self.model not in MODELS:
            raise InvalidParameterError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.scheme not in SCHEMES:
            raise InvalidParameterError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_total / self.dt)))


@dataclass(frozen=True)
class ParticleState:
    """One trajectory's state: position, velocity, time, and wave phase."""

    x: float
    u: float
    t: float
    phi: float


@dataclass(frozen=True)
class DriftEstimate:
    """Ensemble drift estimate with its standard error and accounting."""

    mean: float
    stderr: float
    n_traj: int
    total_steps: int

    def __post_init__(self):
        if not (self.stderr >= 0.0):
            raise InvalidParameterError(f"stderr must be >= 0, got {self.stderr}")


def rng_stream(master_seed: int, traj_index: int) -> np.random.Generator:
    """The counter-based random stream owned by one trajectory.

    Distinct (master_seed, traj_index) keys select statistically
    independent Philox streams, independent of the order in which they are
    created or consumed.
    """
    key = np.array([master_seed, traj_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _check_finite(x: float, u: float, label: str):
    if not (math.isfinite(x) and math.isfinite(u)):
        raise DivergenceError(f"non-finite state at {label}: x={x}, u={u}")


def step_inertia(
    state: ParticleState,
    dt: float,
    params: ReducedParams,
    wave: WaveSpec,
    noise: float,
    exact_ou: bool = False,
) -> ParticleState:
    """One velocity-relaxation step; f is evaluated at the pre-step state.

    Euler-Maruyama by default: u' = u - lam (u - eps f) dt + lam sigma sqrt(dt) z,
    x' = x + u dt.  With ``exact_ou`` the velocity instead takes the exact
    OU transition toward the frozen force value eps*f.
    """
    if not (dt > 0.0):
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    f = float(wave_velocity(wave, state.x, state.t, state.phi))
    target = params.epsilon * f
    if exact_ou:
        decay = math.exp(-params.lam * dt)
        _, var = ou_transition(0.0, dt, params)
        u_new = target + (state.u - target) * decay + math.sqrt(var) * noise
    else:
        u_new = state.u - params.lam * (state.u - target) * dt \
            + params.lam * params.sigma * math.sqrt(dt) * noise
    x_new = state.x + state.u * dt
    _check_finite(x_new, u_new, f"t={state.t + dt:g}")
    return ParticleState(x_new, u_new, state.t + dt, state.phi)


def step_eddy(
    state: ParticleState,
    dt: float,
    params: ReducedParams,
    wave: WaveSpec,
    noise: float,
    exact_ou: bool = False,
) -> ParticleState:
    """One wave-advection step: x' = x + (u + eps f(x, t)) dt.

    The random velocity relaxes by Euler-Maruyama, or by its exact OU
    transition when ``exact_ou`` is set.
    """
    if not (dt > 0.0):
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    f = float(wave_velocity(wave, state.x, state.t, state.phi))
    if exact_ou:
        mean, var = ou_transition(state.u, dt, params)
        u_new = mean + math.sqrt(var) * noise
    else:
        u_new = state.u - params.lam * state.u * dt \
            + params.lam * params.sigma * math.sqrt(dt) * noise
    x_new = state.x + (state.u + params.epsilon * f) * dt
    _check_finite(x_new, u_new, f"t={state.t + dt:g}")
    return ParticleState(x_new, u_new, state.t + dt, state.phi)


def _scheme_coefficients(config: SimConfig, params: ReducedParams) -> tuple[float, float]:
    """(velocity retention factor, noise scale) for one time step."""
    if config.scheme == "euler":
        keep = 1.0 - params.lam * config.dt
        scale = params.lam * params.sigma * math.sqrt(config.dt)
    else:
        keep = math.exp(-params.lam * config.dt)
        _, var = ou_transition(0.0, config.dt, params)
        scale = math.sqrt(var)
    return keep, scale


def _run_chunk(
    config: SimConfig,
    params: ReducedParams,
    wave: WaveSpec,
    idx_lo: int,
    idx_hi: int,
    record_velocity: bool = False,
):
    """Advance trajectories [idx_lo, idx_hi) and return their final positions."""
    m = idx_hi - idx_lo
    dt = config.dt
    n_steps = config.n_steps
    rngs = [rng_stream(config.master_seed, i) for i in range(idx_lo, idx_hi)]

    phi = np.empty(m)
    u = np.empty(m)
    u_std = ou_stationary_std(params)
    for j, rng in enumerate(rngs):
        phi[j] = TWO_PI * rng.random() if wave.phase is None else wave.phase
        u[j] = u_std * rng.standard_normal()
    x = np.zeros(m)

    record = None
    if record_velocity:
        record = np.empty((m, n_steps + 1))
        record[:, 0] = u

    keep, noise_scale = _scheme_coefficients(config, params)
    force_gain = (params.lam * dt if config.scheme == "euler" else 1.0 - keep) \
        * params.epsilon * wave.u
    advect_gain = dt * params.epsilon * wave.u
    k = wave.k
    omega = wave.omega
    inertia = config.model == "inertia"

    work = np.empty(m)
    xstep = np.empty(m)
    noise = np.empty((_NOISE_BLOCK, m))
    step = 0
    # non-finite values propagate harmlessly to the block-end check below
    with np.errstate(over="ignore", invalid="ignore"):
        while step < n_steps:
            block = min(_NOISE_BLOCK, n_steps - step)
            for j, rng in enumerate(rngs):
                noise[:block, j] = rng.standard_normal(block)
            noise[:block] *= noise_scale
            for i in range(block):
                t = (step + i) * dt
                # wave factor cos(k x - omega t + phi) at the pre-step state
                np.multiply(x, k, out=work)
                work += phi
                work -= omega * t
                np.cos(work, out=work)
                # position update uses the pre-step velocity
                np.multiply(u, dt, out=xstep)
                x += xstep
                if inertia:
                    u *= keep
                    work *= force_gain
                    u += work
                else:
                    work *= advect_gain
                    x += work
                    u *= keep
                u += noise[i]
                if record is not None:
                    record[:, step + i + 1] = u
            step += block
            finite = np.isfinite(x) & np.isfinite(u)
            if not finite.all():
                bad = int(np.flatnonzero(~finite)[0])
                raise DivergenceError(
                    f"trajectory {idx_lo + bad} diverged by t={step * dt:g} "
                    f"(model={config.model}, dt={dt:g})"
                )
    return x, record


def _chunk_displacements(args) -> tuple[int, np.ndarray]:
    config, params, wave, lo, hi = args
    final_x, _ = _run_chunk(config, params, wave, lo, hi)
    return lo, final_x


def _ensemble_displacements(
    config: SimConfig, params: ReducedParams, wave: WaveSpec, workers: int
) -> np.ndarray:
    n = config.n_traj
    spans = [(lo, min(lo + _CHUNK, n)) for lo in range(0, n, _CHUNK)]
    out = np.empty(n)
    if workers <= 1 or len(spans) == 1:
        for lo, hi in spans:
            out[lo:hi] = _run_chunk(config, params, wave, lo, hi)[0]
        return out
    jobs = [(config, params, wave, lo, hi) for lo, hi in spans]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_chunk_displacements, job) for job in jobs]
        for future in as_completed(futures):
            lo, final_x = future.result()
            out[lo : lo + final_x.shape[0]] = final_x
    return out


def simulate_trajectory(
    config: SimConfig,
    params: ReducedParams,
    wave: WaveSpec,
    traj_index: int,
    record_velocity: bool = False,
):
    """Run one trajectory; returns (x_final, x_initial, velocity samples or None).

    Velocity samples, when requested, hold u at every step including the
    initial stationary draw.
    """
    final_x, record = _run_chunk(
        config, params, wave, traj_index, traj_index + 1, record_velocity
    )
    samples = record[0] if record is not None else None
    return float(final_x[0]), 0.0, samples


def _require_ensemble(config: SimConfig):
    # ensemble estimators need a horizon well beyond one step
    if config.t_total < 10.0 * config.dt:
        raise InvalidParameterError(
            f"ensemble estimates need t_total >= 10*dt, got t_total={config.t_total}, dt={config.dt}"
        )


def estimate_drift(
    config: SimConfig, params: ReducedParams, wave: WaveSpec, workers: int = 1
) -> DriftEstimate:
    """Ensemble drift estimate: mean of (x_final - x_initial)/t_total.

    Trajectories may run in parallel (``workers`` processes); the result is
    bit-identical for any worker count.
    """
    _require_ensemble(config)
    disp = _ensemble_displacements(config, params, wave, workers)
    rates = disp / config.t_total
    mean = float(rates.mean())
    stderr = float(rates.std(ddof=1) / math.sqrt(config.n_traj)) if config.n_traj > 1 else 0.0
    return DriftEstimate(mean, stderr, config.n_traj, config.n_traj * config.n_steps)


def estimate_variance_rate(
    config: SimConfig, params: ReducedParams, wave: WaveSpec, workers: int = 1
) -> tuple[float, float]:
    """Ensemble estimate of lim Var[X_t]/t for the eddy model.

    Returns (rate, stderr); the standard error uses the asymptotic variance
    of a Gaussian variance estimator, rate*sqrt(2/(n-1)).
    """
    if config.model != "eddy":
        raise InvalidParameterError("variance-rate estimation is defined for the eddy model")
    _require_ensemble(config)
    if config.n_traj < 2:
        raise InvalidParameterError("variance-rate estimation needs n_traj >= 2")
    disp = _ensemble_displacements(config, params, wave, workers)
    rate = float(disp.var(ddof=1) / config.t_total)
    stderr = rate * math.sqrt(2.0 / (config.n_traj - 1))
    return rate, stderr
