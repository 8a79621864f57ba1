"""Drift and dispersion of wave-driven noisy particles.

Asymptotic (quadrature) and Monte Carlo evaluation of the mean drift and
position-variance growth of particles in a travelling wave, for an
inertial particle under thermal noise and for a tracer forced by an
exponentially correlated random velocity, plus a two-dimensional
multi-wave sorting demo.
"""

from .asymptotics import (
    DriftValue,
    PeakResult,
    QuadratureAccuracyError,
    QuadratureSettings,
    drift_classical,
    drift_eddy,
    drift_inertia,
    drift_inertia_2d,
    find_drift_peak,
    quad_osc_decay,
    variance_rate_classical,
    variance_rate_eddy,
)
from .mc import (
    DivergenceError,
    DriftEstimate,
    ParticleState,
    SimConfig,
    estimate_drift,
    estimate_variance_rate,
    rng_stream,
    simulate_trajectory,
    step_eddy,
    step_inertia,
)
from .model import (
    InvalidParameterError,
    PhysicalParams,
    ReducedParams,
    WaveSpec,
    cov_displacement,
    ou_stationary_sample,
    ou_transition,
    to_reduced,
    wave_velocity,
)
from .sorting import (
    SpeciesDrift,
    SpeciesSpec,
    UndefinedDirectionError,
    WaveField2D,
    direction_angle_stderr,
    fanout_angle,
    predicted_drift_vector,
    simulate_sorting,
)

__version__ = "0.1.0"
