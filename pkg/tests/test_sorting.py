import math

import numpy as np
import pytest

from stokesdrift.asymptotics import drift_eddy, drift_inertia
from stokesdrift.mc import SimConfig, estimate_drift
from stokesdrift.model import InvalidParameterError, ReducedParams, WaveSpec
from stokesdrift.sorting import (
    SpeciesSpec,
    UndefinedDirectionError,
    WaveField2D,
    direction_angle_stderr,
    fanout_angle,
    predicted_drift_vector,
    simulate_sorting,
)

ROOT_HALF = 1.0 / math.sqrt(2.0)


def species(lam=1.0, epsilon=0.1, model="eddy", label="s"):
    return SpeciesSpec(label, ReducedParams(lam=lam, sigma=1.0, epsilon=epsilon), model)


def two_wave_field(u=1.0):
    return WaveField2D([
        ((ROOT_HALF, ROOT_HALF), WaveSpec(u=u, k=1.0, omega=0.5)),
        ((ROOT_HALF, -ROOT_HALF), WaveSpec(u=u, k=1.0, omega=2.0)),
    ])


class TestWaveField:
    def test_non_unit_direction_rejected(self):
        with pytest.raises(InvalidParameterError):
            WaveField2D([((1.0, 1.0), WaveSpec(u=1.0, k=1.0, omega=1.0))])

    def test_duplicate_wave_rejected(self):
        spec = WaveSpec(u=1.0, k=1.0, omega=1.0)
        with pytest.raises(InvalidParameterError):
            WaveField2D([((1.0, 0.0), spec), ((1.0, 0.0), spec)])

    def test_same_direction_different_frequency_allowed(self):
        WaveField2D([
            ((1.0, 0.0), WaveSpec(u=1.0, k=1.0, omega=1.0)),
            ((1.0, 0.0), WaveSpec(u=1.0, k=1.0, omega=2.0)),
        ])

    def test_identical_spec_different_directions_allowed(self):
        spec = WaveSpec(u=1.0, k=1.0, omega=1.0)
        WaveField2D([((1.0, 0.0), spec), ((0.0, 1.0), spec)])


class TestPrediction:
    def test_single_wave_along_x(self):
        spec = WaveSpec(u=1.0, k=1.0, omega=1.0)
        field = WaveField2D([((1.0, 0.0), spec)])
        sp = species()
        vector = predicted_drift_vector(sp, field)
        scalar = drift_eddy(sp.params, spec).value
        assert vector[0] == pytest.approx(scalar, rel=1e-12)
        assert vector[1] == 0.0

    def test_two_identical_waves_along_axes(self):
        spec = WaveSpec(u=1.0, k=1.0, omega=1.0)
        field = WaveField2D([((1.0, 0.0), spec), ((0.0, 1.0), spec)])
        sp = species(model="inertia")
        vector = predicted_drift_vector(sp, field)
        scalar = drift_inertia(sp.params, spec).value
        assert vector[0] == pytest.approx(scalar, rel=1e-12)
        assert vector[1] == pytest.approx(scalar, rel=1e-12)
        assert fanout_angle(vector, np.array([1.0, 1.0])) == pytest.approx(0.0, abs=1e-12)

    def test_rotation_equivariance(self):
        theta = 0.71
        rot = np.array([[math.cos(theta), -math.sin(theta)],
                        [math.sin(theta), math.cos(theta)]])
        waves = [
            ((1.0, 0.0), WaveSpec(u=1.0, k=1.0, omega=0.5)),
            ((0.0, 1.0), WaveSpec(u=1.0, k=1.0, omega=2.0)),
        ]
        field = WaveField2D(waves)
        rotated = WaveField2D([(rot @ np.asarray(d), s) for d, s in waves])
        sp = species(lam=0.7, model="inertia")
        v = predicted_drift_vector(sp, field)
        v_rot = predicted_drift_vector(sp, rotated)
        np.testing.assert_allclose(v_rot, rot @ v, rtol=1e-12, atol=1e-18)


class TestFanoutAngle:
    def test_orthogonal(self):
        assert fanout_angle((1.0, 0.0), (0.0, 1.0)) == pytest.approx(math.pi / 2)

    def test_parallel(self):
        assert fanout_angle((1.0, 1.0), (2.0, 2.0)) == pytest.approx(0.0, abs=1e-15)

    def test_antiparallel(self):
        assert fanout_angle((1.0, 0.0), (-1.0, 0.0)) == pytest.approx(math.pi)

    def test_zero_vector_rejected(self):
        with pytest.raises(UndefinedDirectionError):
            fanout_angle((0.0, 0.0), (1.0, 0.0))
        with pytest.raises(UndefinedDirectionError):
            direction_angle_stderr((0.0, 0.0), (1.0, 1.0))

    def test_angle_stderr_propagation(self):
        # unit vector along x with isotropic error s: angular error ~ s
        assert direction_angle_stderr((1.0, 0.0), (0.01, 0.01)) == pytest.approx(0.01, rel=1e-12)


class TestSimulation:
    def test_zero_coupling_drifts_vanish(self):
        field = two_wave_field()
        config = SimConfig(dt=1e-3, t_total=20.0, n_traj=64, master_seed=31, model="eddy")
        results = simulate_sorting([species(epsilon=0.0, label="a")], field, config)
        (result,) = results
        assert abs(result.velocity[0]) <= 3.0 * result.stderr[0]
        assert abs(result.velocity[1]) <= 3.0 * result.stderr[1]

    def test_single_wave_field_matches_1d_estimator(self):
        spec = WaveSpec(u=1.0, k=1.0, omega=1.0)
        field = WaveField2D([((1.0, 0.0), spec)])
        sp = species(epsilon=0.2, label="a")
        config = SimConfig(dt=1e-3, t_total=100.0, n_traj=128, master_seed=32, model="eddy")
        (result,) = simulate_sorting([sp], field, config)
        one_d = estimate_drift(config, sp.params, spec)
        combined = math.hypot(result.stderr[0], one_d.stderr)
        assert abs(result.velocity[0] - one_d.mean) <= 3.0 * combined
        assert abs(result.velocity[1]) <= 3.0 * result.stderr[1]

    def test_superposition_of_single_wave_runs(self):
        # two-wave MC drift equals the sum of the single-wave MC drifts
        field = two_wave_field()
        sp = species(epsilon=0.1, model="inertia", label="a")
        config = SimConfig(dt=1e-3, t_total=100.0, n_traj=128, master_seed=33,
                           model="inertia")
        (both,) = simulate_sorting([sp], field, config)
        singles = []
        for direction, spec in field.waves:
            single_field = WaveField2D([(direction, spec)])
            (single,) = simulate_sorting([sp], single_field, config)
            singles.append(single)
        total = singles[0].velocity + singles[1].velocity
        err = np.sqrt(both.stderr**2 + singles[0].stderr**2 + singles[1].stderr**2)
        assert np.all(np.abs(both.velocity - total) <= 3.0 * err)

    def test_species_fanout_with_mc(self):
        field = two_wave_field(u=3.0)
        slow = species(lam=0.5, model="inertia", label="slow")
        fast = species(lam=5.0, model="inertia", label="fast")
        config = SimConfig(dt=1e-3, t_total=60.0, n_traj=256, master_seed=34,
                           model="inertia")
        results = simulate_sorting([slow, fast], field, config)
        for sp, result in zip((slow, fast), results):
            predicted = predicted_drift_vector(sp, field)
            np.testing.assert_array_less(np.abs(result.velocity - predicted),
                                         3.0 * result.stderr)
        angle = fanout_angle(results[0].velocity, results[1].velocity)
        predicted_angle = fanout_angle(predicted_drift_vector(slow, field),
                                       predicted_drift_vector(fast, field))
        assert angle > 0.0
        assert predicted_angle > 0.0

    def test_reproducible_across_workers(self):
        field = two_wave_field()
        sp = species(epsilon=0.1, label="a")
        config = SimConfig(dt=1e-3, t_total=1.0, n_traj=520, master_seed=35, model="eddy")
        serial = simulate_sorting([sp], field, config, workers=1)
        parallel = simulate_sorting([sp], field, config, workers=2)
        np.testing.assert_array_equal(serial[0].velocity, parallel[0].velocity)
        np.testing.assert_array_equal(serial[0].stderr, parallel[0].stderr)
