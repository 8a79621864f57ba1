"""Drift and variance-rate formulas against independent oracles.

The frozen constants below come from a step-halving trapezoid oracle on
[0, 80] at unit parameters (lam = sigma = u = k = omega = 1), where
C(t) = t + exp(-t) - 1; the oracle itself is reproduced here so the
constants stay auditable.
"""

from dataclasses import replace

import numpy as np
import pytest

from stokesdrift.asymptotics import (
    drift_classical,
    drift_eddy,
    drift_inertia,
    drift_inertia_2d,
    find_drift_peak,
    variance_rate_classical,
    variance_rate_eddy,
)
from stokesdrift.model import InvalidParameterError, ReducedParams, WaveSpec

UNIT_WAVE = WaveSpec(u=1.0, k=1.0, omega=1.0)

# trapezoid-oracle values (see equations in the module docstring)
EDDY_DRIFT_LAM1_EPS02 = 0.021827011692207
INERTIA_DRIFT_LAM1_EPS02 = 0.013673820170773
VARRATE_LAM1_EPS05 = 1.085461376067447


def unit_params(lam=1.0, epsilon=0.2):
    return ReducedParams(lam=lam, sigma=1.0, epsilon=epsilon)


def trapezoid_halving(f, a, b, tol=1e-9):
    """Step-halving trapezoid rule; independent of the panel engine."""
    n = 512
    prev = None
    while n <= 2**24:
        t = np.linspace(a, b, n + 1)
        value = np.trapezoid(f(t), t)
        if prev is not None and abs(value - prev) < tol:
            return value
        prev = value
        n *= 2
    raise RuntimeError("trapezoid oracle did not converge")


class TestFrozenOracles:
    def test_eddy_oracle_value(self):
        env = lambda t: np.exp(-0.5 * (t + np.exp(-t) - 1.0))
        integral = trapezoid_halving(lambda t: env(t) * np.sin(t), 0.0, 80.0)
        assert 0.02 * integral == pytest.approx(EDDY_DRIFT_LAM1_EPS02, rel=1e-7)
        assert drift_eddy(unit_params(), UNIT_WAVE).value == pytest.approx(
            EDDY_DRIFT_LAM1_EPS02, rel=1e-7
        )

    def test_inertia_oracle_value(self):
        env = lambda t: (1.0 - np.exp(-t)) * np.exp(-0.5 * (t + np.exp(-t) - 1.0))
        integral = trapezoid_halving(lambda t: env(t) * np.sin(t), 0.0, 80.0)
        assert 0.02 * integral == pytest.approx(INERTIA_DRIFT_LAM1_EPS02, rel=1e-7)
        assert drift_inertia(unit_params(), UNIT_WAVE).value == pytest.approx(
            INERTIA_DRIFT_LAM1_EPS02, rel=1e-7
        )

    def test_variance_rate_oracle_value(self):
        env = lambda t: np.exp(-0.5 * (t + np.exp(-t) - 1.0))
        integral = trapezoid_halving(lambda t: env(t) * np.cos(t), 0.0, 80.0)
        assert 1.0 + 0.25 * integral == pytest.approx(VARRATE_LAM1_EPS05, rel=1e-8)
        assert variance_rate_eddy(unit_params(epsilon=0.5), UNIT_WAVE) == pytest.approx(
            VARRATE_LAM1_EPS05, rel=1e-8
        )

    def test_eddy_drift_exceeds_classical_at_unit_lam(self):
        assert drift_eddy(unit_params(), UNIT_WAVE).value > 0.016


class TestClassicalLimit:
    def test_unit_value(self):
        # a = 1/2 -> (eps^2/2) * 1/(1/4 + 1) = 0.02 * 0.8 = 0.016
        assert drift_classical(unit_params(), UNIT_WAVE).value == pytest.approx(0.016, rel=1e-15)

    def test_zero_omega(self):
        wave = WaveSpec(u=1.0, k=1.0, omega=0.0)
        assert drift_classical(unit_params(), wave).value == 0.0

    def test_large_sigma_kills_drift(self):
        assert drift_classical(ReducedParams(1.0, 1e4, 0.2), UNIT_WAVE).value < 1e-10

    @pytest.mark.parametrize("drift_fn", [drift_eddy, drift_inertia])
    def test_lam_to_infinity_limits(self, drift_fn):
        value = drift_fn(unit_params(lam=1e8), UNIT_WAVE).value
        assert value == pytest.approx(0.016, rel=1e-6)

    def test_variance_rate_limits(self):
        assert variance_rate_classical(unit_params(epsilon=0.5), UNIT_WAVE) == pytest.approx(1.1, rel=1e-15)
        assert variance_rate_eddy(unit_params(lam=1e8, epsilon=0.5), UNIT_WAVE) == pytest.approx(1.1, rel=1e-5)

    def test_variance_rate_classical_edges(self):
        assert variance_rate_classical(unit_params(epsilon=0.0), UNIT_WAVE) == 1.0
        fast = WaveSpec(u=1.0, k=1.0, omega=1e9)
        assert variance_rate_classical(unit_params(epsilon=0.5), fast) == pytest.approx(1.0, rel=1e-12)
        assert variance_rate_eddy(unit_params(epsilon=0.0), UNIT_WAVE) == 1.0


class TestReductionIdentity:
    @pytest.mark.parametrize("lam", [0.5, 5.0])
    def test_reduced_matches_double_integral(self, lam):
        one_d = drift_inertia(unit_params(lam=lam), UNIT_WAVE).value
        two_d = drift_inertia_2d(unit_params(lam=lam), UNIT_WAVE).value
        assert one_d == pytest.approx(two_d, rel=1e-6)

    def test_trivial_zeros(self):
        assert drift_inertia(unit_params(epsilon=0.0), UNIT_WAVE).value == 0.0
        assert drift_inertia_2d(unit_params(epsilon=0.0), UNIT_WAVE).value == 0.0
        assert drift_eddy(unit_params(epsilon=0.0), UNIT_WAVE).value == 0.0


class TestSymmetries:
    @pytest.mark.parametrize("drift_fn", [drift_eddy, drift_inertia])
    @pytest.mark.parametrize("lam", [0.5, 2.0])
    def test_omega_oddness(self, drift_fn, lam):
        plus = drift_fn(unit_params(lam=lam), UNIT_WAVE).value
        minus = drift_fn(unit_params(lam=lam), replace(UNIT_WAVE, omega=-1.0)).value
        assert minus == pytest.approx(-plus, rel=1e-7)

    def test_omega_oddness_classical(self):
        plus = drift_classical(unit_params(), UNIT_WAVE).value
        minus = drift_classical(unit_params(), replace(UNIT_WAVE, omega=-1.0)).value
        assert minus == -plus

    @pytest.mark.parametrize("drift_fn", [drift_eddy, drift_inertia, drift_classical])
    def test_epsilon_square_scaling(self, drift_fn):
        def value(eps):
            p = unit_params(epsilon=eps)
            return (drift_fn(p, UNIT_WAVE) if drift_fn is drift_classical
                    else drift_fn(p, UNIT_WAVE)).value

        v1 = value(0.1)
        v4 = value(0.4)
        assert v4 == pytest.approx(16.0 * v1, rel=1e-12)
        assert value(-0.1) == pytest.approx(v1, rel=1e-12)

    def test_variance_correction_epsilon_scaling(self):
        base = variance_rate_eddy(unit_params(epsilon=0.25), UNIT_WAVE) - 1.0
        four = variance_rate_eddy(unit_params(epsilon=0.5), UNIT_WAVE) - 1.0
        assert four == pytest.approx(4.0 * base, rel=1e-10)

    def test_error_estimates_nonnegative(self):
        for fn in (drift_eddy, drift_inertia, drift_inertia_2d):
            assert fn(unit_params(), UNIT_WAVE).error >= 0.0


class TestPeakFinder:
    def test_eddy_interior_peak(self):
        result = find_drift_peak("eddy", unit_params(), UNIT_WAVE, (0.05, 50.0))
        assert result.interior
        assert 0.05 < result.lambda_star < 50.0
        assert result.drift > drift_classical(unit_params(), UNIT_WAVE).value

    def test_endpoint_maximum_reported_as_no_interior_peak(self):
        # inertial drift still rises throughout [0.05, 1]
        result = find_drift_peak("inertia", unit_params(), UNIT_WAVE, (0.05, 1.0))
        assert not result.interior
        assert result.lambda_star == pytest.approx(1.0)

    def test_degenerate_range(self):
        result = find_drift_peak("eddy", unit_params(), UNIT_WAVE, (2.0, 2.0))
        assert result.lambda_star == 2.0
        assert result.drift == pytest.approx(drift_eddy(unit_params(lam=2.0), UNIT_WAVE).value)

    def test_invalid_inputs(self):
        with pytest.raises(InvalidParameterError):
            find_drift_peak("eddy", unit_params(), UNIT_WAVE, (5.0, 1.0))
        with pytest.raises(InvalidParameterError):
            find_drift_peak("classical", unit_params(), UNIT_WAVE, (0.1, 1.0))


class TestGuards:
    def test_variance_rate_undamped(self):
        wave = WaveSpec(u=1.0, k=0.0, omega=1.0)
        with pytest.raises(InvalidParameterError):
            variance_rate_eddy(unit_params(epsilon=0.5), wave)

    def test_zero_wavenumber_drift_is_zero(self):
        wave = WaveSpec(u=1.0, k=0.0, omega=1.0)
        assert drift_eddy(unit_params(), wave).value == 0.0
        assert drift_inertia(unit_params(), wave).value == 0.0
        assert drift_classical(unit_params(), wave).value == 0.0
