"""Multi-wave drift superposition in two dimensions: particle sorting.

At leading order in the wave coupling, waves whose wavevectors or
frequencies differ contribute independent drifts, so the net drift of a
species is the sum of its single-wave drifts times the wave directions.
Species with equal diffusivity but different relaxation rates ``lam``
respond differently to each wave and therefore drift in different
directions ("fanout"), which sorts them continuously.

:func:`predicted_drift_vector` evaluates that superposition by quadrature;
:func:`simulate_sorting` runs the full two-dimensional SDE ensemble
(isotropic noise, every wave contributing its travelling-wave velocity)
under the same reproducibility contract as :mod:`stokesdrift.mc`; species
``s`` trajectory ``i`` owns stream ``rng_stream(seed, s*n_traj + i)`` and
consumes, in order, one uniform phase per wave, two stationary-velocity
normals, then two normals per step (x then y component).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .asymptotics import QuadratureSettings, drift_eddy, drift_inertia
from .mc import _CHUNK, _NOISE_BLOCK, MODELS, DivergenceError, SimConfig, rng_stream
from .model import TWO_PI, InvalidParameterError, ReducedParams, WaveSpec, ou_stationary_std

_UNIT_NORM_TOL = 1e-12


class UndefinedDirectionError(ValueError):
    """A drift direction was requested for a zero vector."""


@dataclass(frozen=True)
class WaveField2D:
    """A set of travelling waves with unit direction vectors.

    Any two waves must differ in wavevector (k times direction) or in
    frequency; otherwise their drift cross-terms would not average away and
    the superposition prediction would not apply.
    """

    waves: tuple[tuple[np.ndarray, WaveSpec], ...]

    def __init__(self, waves: Sequence[tuple[Sequence[float], WaveSpec]]):
        frozen = []
        for direction, spec in waves:
            d = np.asarray(direction, dtype=float)
            if d.shape != (2,):
                raise InvalidParameterError(f"direction must be a 2-vector, got shape {d.shape}")
            if abs(float(np.hypot(d[0], d[1])) - 1.0) > _UNIT_NORM_TOL:
                raise InvalidParameterError(f"direction {d} is not unit length")
            d.setflags(write=False)
            frozen.append((d, spec))
        for i in range(len(frozen)):
            for j in range(i + 1, len(frozen)):
                di, si = frozen[i]
                dj, sj = frozen[j]
                same_kvec = np.allclose(si.k * di, sj.k * dj, rtol=0.0, atol=1e-12)
                if same_kvec and si.omega == sj.omega:
                    raise InvalidParameterError(
                        f"waves {i} and {j} share both wavevector and frequency"
                    )
        object.__setattr__(self, "waves", tuple(frozen))


@dataclass(frozen=True)
class SpeciesSpec:
    """One particle species: a label, its reduced parameters, and its model."""

    label: str
    params: ReducedParams
    model: str

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidParameterError(f"model must be one of {MODELS}, got {self.model!r}")


@dataclass(frozen=True)
class SpeciesDrift:
    """Monte Carlo drift vector of one species with per-component errors."""

    label: str
    velocity: np.ndarray  # shape (2,)
    stderr: np.ndarray  # shape (2,)
    n_traj: int


def predicted_drift_vector(
    species: SpeciesSpec, field: WaveField2D, settings: QuadratureSettings | None = None
) -> np.ndarray:
    """Leading-order drift vector: sum of single-wave drifts times directions."""
    drift_fn = drift_inertia if species.model == "inertia" else drift_eddy
    total = np.zeros(2)
    for direction, spec in field.waves:
        total += drift_fn(species.params, spec, settings).value * direction
    return total


def fanout_angle(v1, v2) -> float:
    """Unsigned angle in [0, pi] between two drift vectors."""
    a = np.asarray(v1, dtype=float)
    b = np.asarray(v2, dtype=float)
    if not (np.linalg.norm(a) > 0.0 and np.linalg.norm(b) > 0.0):
        raise UndefinedDirectionError("drift direction undefined for a zero vector")
    cross = a[0] * b[1] - a[1] * b[0]
    dot = a[0] * b[0] + a[1] * b[1]
    return math.atan2(abs(cross), dot)


def direction_angle_stderr(velocity, stderr) -> float:
    """First-order standard error of atan2(vy, vx) from component errors."""
    v = np.asarray(velocity, dtype=float)
    s = np.asarray(stderr, dtype=float)
    norm2 = float(v @ v)
    if norm2 == 0.0:
        raise UndefinedDirectionError("drift direction undefined for a zero vector")
    return math.sqrt(v[0] ** 2 * s[1] ** 2 + v[1] ** 2 * s[0] ** 2) / norm2


def _run_chunk_2d(
    config: SimConfig,
    species: SpeciesSpec,
    field: WaveField2D,
    stream_offset: int,
    idx_lo: int,
    idx_hi: int,
) -> np.ndarray:
    """Advance 2-D trajectories [idx_lo, idx_hi); returns final positions (m, 2)."""
    m = idx_hi - idx_lo
    params = species.params
    dt = config.dt
    n_steps = config.n_steps
    n_waves = len(field.waves)
    rngs = [rng_stream(config.master_seed, stream_offset + i) for i in range(idx_lo, idx_hi)]

    phases = np.empty((n_waves, m))
    u0 = np.empty(m)
    u1 = np.empty(m)
    u_std = ou_stationary_std(params)
    for j, rng in enumerate(rngs):
        for w, (_, spec) in enumerate(field.waves):
            phases[w, j] = TWO_PI * rng.random() if spec.phase is None else spec.phase
        draw = rng.standard_normal(2)
        u0[j] = u_std * draw[0]
        u1[j] = u_std * draw[1]
    x0 = np.zeros(m)
    x1 = np.zeros(m)

    inertia = species.model == "inertia"
    if config.scheme == "euler":
        keep = 1.0 - params.lam * dt
        noise_scale = params.lam * params.sigma * math.sqrt(dt)
        coupling = params.lam * dt * params.epsilon
    else:
        keep = math.exp(-params.lam * dt)
        noise_scale = math.sqrt(0.5 * params.lam * params.sigma**2 * (-math.expm1(-2.0 * params.lam * dt)))
        coupling = (1.0 - keep) * params.epsilon
    if not inertia:
        coupling = dt * params.epsilon
    # per wave: phase gradient a = k*direction and force gains along each axis
    wave_a0 = [spec.k * d[0] for d, spec in field.waves]
    wave_a1 = [spec.k * d[1] for d, spec in field.waves]
    wave_g0 = [coupling * spec.u * d[0] for d, spec in field.waves]
    wave_g1 = [coupling * spec.u * d[1] for d, spec in field.waves]
    wave_omega = [spec.omega for _, spec in field.waves]

    work = np.empty(m)
    force0 = np.empty(m)
    force1 = np.empty(m)
    xstep = np.empty(m)
    noise0 = np.empty((_NOISE_BLOCK, m))
    noise1 = np.empty((_NOISE_BLOCK, m))
    step = 0
    # non-finite values propagate harmlessly to the block-end check below
    with np.errstate(over="ignore", invalid="ignore"):
        while step < n_steps:
            block = min(_NOISE_BLOCK, n_steps - step)
            for j, rng in enumerate(rngs):
                draws = rng.standard_normal((block, 2))
                noise0[:block, j] = draws[:, 0]
                noise1[:block, j] = draws[:, 1]
            noise0[:block] *= noise_scale
            noise1[:block] *= noise_scale
            for i in range(block):
                t = (step + i) * dt
                force0.fill(0.0)
                force1.fill(0.0)
                for w in range(n_waves):
                    np.multiply(x0, wave_a0[w], out=work)
                    if wave_a1[w] != 0.0:
                        work += wave_a1[w] * x1
                    work += phases[w]
                    work -= wave_omega[w] * t
                    np.cos(work, out=work)
                    if wave_g0[w] != 0.0:
                        force0 += wave_g0[w] * work
                    if wave_g1[w] != 0.0:
                        force1 += wave_g1[w] * work
                # position update from the pre-step velocity (and wave advection
                # for the eddy model, where the force gains carry dt*epsilon)
                np.multiply(u0, dt, out=xstep)
                x0 += xstep
                np.multiply(u1, dt, out=xstep)
                x1 += xstep
                if inertia:
                    u0 *= keep
                    u0 += force0
                    u1 *= keep
                    u1 += force1
                else:
                    x0 += force0
                    x1 += force1
                    u0 *= keep
                    u1 *= keep
                u0 += noise0[i]
                u1 += noise1[i]
            step += block
            finite = np.isfinite(x0) & np.isfinite(x1) & np.isfinite(u0) & np.isfinite(u1)
            if not finite.all():
                bad = int(np.flatnonzero(~finite)[0])
                raise DivergenceError(
                    f"species {species.label!r} trajectory {idx_lo + bad} diverged "
                    f"by t={step * dt:g}"
                )
    return np.stack([x0, x1], axis=1)


def simulate_sorting(
    species_list: Sequence[SpeciesSpec],
    field: WaveField2D,
    config: SimConfig,
    workers: int = 1,
) -> list[SpeciesDrift]:
    """Monte Carlo drift vectors for every species under the wave field.

    Each species runs ``config.n_traj`` trajectories of the 2-D model with
    isotropic noise; returns per-species mean drift vectors with
    per-component standard errors, in input order.
    """
    if config.t_total < 10.0 * config.dt:
        raise InvalidParameterError(
            f"ensemble estimates need t_total >= 10*dt, got t_total={config.t_total}, dt={config.dt}"
        )
    n = config.n_traj
    spans = [(lo, min(lo + _CHUNK, n)) for lo in range(0, n, _CHUNK)]
    results = []
    for s_index, species in enumerate(species_list):
        offset = s_index * n
        finals = np.empty((n, 2))
        if workers <= 1 or len(spans) == 1:
            for lo, hi in spans:
                finals[lo:hi] = _run_chunk_2d(config, species, field, offset, lo, hi)
        else:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = {
                    pool.submit(_run_chunk_2d, config, species, field, offset, lo, hi): lo
                    for lo, hi in spans
                }
                for future, lo in futures.items():
                    finals[lo : lo + future.result().shape[0]] = future.result()
        rates = finals / config.t_total
        velocity = rates.mean(axis=0)
        stderr = rates.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(2)
        results.append(SpeciesDrift(species.label, velocity, stderr, n))
    return results
