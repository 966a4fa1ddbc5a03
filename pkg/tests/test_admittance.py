import numpy as np
import pytest

from neurocobot.admittance import (
    AdmittanceParams,
    MotionState,
    admittance_step,
    clamp_sigma1,
    damping_schedule,
)
from neurocobot.kinematics import APPROACHING, LEAVING


def params(**kw):
    defaults = dict(sigma0_bar=0.25, sigma1_bar=0.45, lambda_max=40.0)
    defaults.update(kw)
    return AdmittanceParams(**defaults)


class TestDampingSchedule:
    def test_above_upper_threshold_is_zero(self):
        assert damping_schedule(0.50, params()) == 0.0

    def test_midpoint_is_half(self):
        assert damping_schedule(0.35, params()) == pytest.approx(20.0)

    def test_below_lower_threshold_saturates(self):
        assert damping_schedule(0.10, params()) == 40.0

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            damping_schedule(-0.01, params())

    @pytest.mark.parametrize("seed", range(30))
    def test_monotone_and_continuous(self, seed):
        rng = np.random.default_rng(seed)
        s0 = rng.uniform(0.05, 0.4)
        s1 = s0 + rng.uniform(0.02, 0.3)
        p = params(sigma0_bar=s0, sigma1_bar=s1)
        grid = np.linspace(0.0, s1 + 0.3, 400)
        lam = np.array([damping_schedule(s, p) for s in grid])
        assert np.all(np.diff(lam) <= 1e-12)
        assert np.max(np.abs(np.diff(lam))) < p.lambda_max * (grid[1] - grid[0]) / (s1 - s0) + 1e-9

    def test_always_some_damping_when_approaching(self):
        # just below the onset threshold there must be positive damping for
        # any legal approaching sigma1 with the closed-loop sigma0
        for s1 in np.linspace(0.35, 0.45, 11):
            p = params(sigma0_bar=0.25, sigma1_bar=s1)
            assert damping_schedule(s1 - 1e-6, p) > 0.0


class TestAdmittanceStep:
    def test_rest_stays_at_rest(self):
        out = admittance_step(np.zeros(2), MotionState.rest(2), params(), 1.0, 0.008)
        assert not out.velocity.any() and not out.acceleration.any()

    def test_newton_arithmetic(self):
        p = AdmittanceParams(virtual_mass=1.0, base_damping=0.0, lambda_max=1.0,
                             sigma0_bar=0.25, sigma1_bar=0.45)
        out = admittance_step(np.array([2.0, 0.0]), MotionState.rest(2), p, 1.0, 0.1)
        np.testing.assert_allclose(out.acceleration, [2.0, 0.0])
        np.testing.assert_allclose(out.velocity, [0.2, 0.0])

    def test_first_order_steady_state(self):
        p = AdmittanceParams(virtual_mass=10.0, base_damping=20.0, lambda_max=1.0,
                             sigma0_bar=0.25, sigma1_bar=0.45)
        state = MotionState.rest(1)
        for _ in range(int(10.0 / 0.008)):
            state = admittance_step(np.array([20.0]), state, p, 1.0, 0.008)
        assert state.velocity[0] == pytest.approx(1.0, rel=0.01)

    def test_nonpositive_mass_rejected_at_construction(self):
        with pytest.raises(ValueError):
            AdmittanceParams(virtual_mass=0.0)

    def test_dt_and_force_guards(self):
        with pytest.raises(ValueError):
            admittance_step(np.zeros(2), MotionState.rest(2), params(), 1.0, 0.0)
        with pytest.raises(ValueError):
            admittance_step(np.array([np.nan, 0.0]), MotionState.rest(2), params(), 1.0, 0.008)

    @pytest.mark.parametrize("seed", range(25))
    def test_passivity_without_force(self, seed):
        rng = np.random.default_rng(seed)
        p = AdmittanceParams(
            virtual_mass=rng.uniform(0.5, 20.0),
            base_damping=rng.uniform(0.0, 50.0),
            lambda_max=rng.uniform(1.0, 80.0),
            sigma0_bar=0.25, sigma1_bar=0.45,
        )
        state = MotionState(rng.normal(size=2), np.zeros(2))
        speed = np.linalg.norm(state.velocity)
        for _ in range(200):
            state = admittance_step(np.zeros(2), state, p, rng.uniform(0, 0.6), 0.008)
            new_speed = np.linalg.norm(state.velocity)
            assert new_speed <= speed + 1e-12
            speed = new_speed


class TestClampSigma1:
    def test_above_approaching_range(self):
        assert clamp_sigma1(0.50, APPROACHING) == 0.45

    def test_below_approaching_range(self):
        assert clamp_sigma1(0.30, APPROACHING) == 0.35

    def test_inside_leaving_range_unchanged(self):
        assert clamp_sigma1(0.30, LEAVING) == 0.30

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            clamp_sigma1(float("nan"), APPROACHING)

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            clamp_sigma1(0.4, "sideways")

    @pytest.mark.parametrize("mode", [APPROACHING, LEAVING])
    @pytest.mark.parametrize("seed", range(20))
    def test_output_always_inside_bounds(self, mode, seed):
        raw = np.random.default_rng(seed).normal(scale=5.0)
        lo, hi = AdmittanceParams().bounds_for(mode)
        assert lo <= clamp_sigma1(raw, mode) <= hi


class TestParamsValidation:
    def test_threshold_order_enforced(self):
        with pytest.raises(ValueError):
            AdmittanceParams(sigma0_bar=0.5, sigma1_bar=0.4)

    def test_equal_thresholds_degenerate_step(self):
        p = AdmittanceParams(sigma0_bar=0.25, sigma1_bar=0.25)
        assert damping_schedule(0.25, p) == p.lambda_max
        assert damping_schedule(0.2501, p) == 0.0
