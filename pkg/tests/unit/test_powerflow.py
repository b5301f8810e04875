"""Tests for the power-flow model and its quadratic surrogate."""

import numpy as np
import pytest

from cranetraj.config import load_power_model
from cranetraj.errors import DomainError
from cranetraj.kinematics import time_minimal_profile
from cranetraj.models.kinematics import Drive
from cranetraj.models.power import FitDomain, PowerModel, QuadraticSurrogate
from cranetraj.powerflow import (
    SlowPowerProfile,
    characteristic_power,
    configure_drive,
    derivatives,
    first_partials,
    fit_domain_for,
    fit_quadratic,
    nominal_efficiency,
    power,
    slow_profile,
)


class _Smooth:
    """P = 3v² + 5a² + 2va + va², with known derivatives."""

    def power(self, v, a):
        v = np.asarray(v, dtype=float)
        a = np.asarray(a, dtype=float)
        return 3 * v * v + 5 * a * a + 2 * v * a + v * a * a


class TestPower:
    """Tests for P(v, a)."""

    def test_standby_at_rest(self, running_model):
        """At rest both gears draw exactly their standby loss."""
        lifting = configure_drive(load_power_model(None, Drive.LIFTING), 1000.0, 1, lifting=True)

        assert float(power(running_model, 0.0, 0.0)) == pytest.approx(running_model.standby_loss)
        assert float(power(lifting, 0.0, 0.0)) == pytest.approx(lifting.standby_loss)

    def test_motor_and_regen_efficiency(self):
        """Motoring divides by η_motor, braking multiplies by η_regen."""
        model = PowerModel(
            effective_mass=1000.0,
            drivetrain_efficiency_motor=0.8,
            drivetrain_efficiency_regen=0.9,
        )

        assert float(model.power(1.0, 1.0)) == pytest.approx(1250.0)
        assert float(model.power(1.0, -1.0)) == pytest.approx(-900.0)

    def test_copper_loss(self):
        """Copper loss is quadratic in the tractive force while moving."""
        model = PowerModel(effective_mass=1000.0, copper_loss_coeff=1e-3)

        assert float(model.power(1.0, 1.0)) == pytest.approx(2000.0)

    def test_switch_smoothing_is_close_to_the_switch(self):
        """Away from P_mech = 0 the smoothed switch matches the exact one."""
        exact = PowerModel(effective_mass=1000.0, drivetrain_efficiency_motor=0.8)
        smooth = exact.model_copy(update={"switch_smoothing": 1.0})

        assert float(smooth.power(2.0, 0.5)) == pytest.approx(float(exact.power(2.0, 0.5)), abs=1.0)

    def test_vectorized(self, running_model):
        v = np.linspace(0.0, 3.0, 7)
        a = np.full(7, 0.2)

        assert running_model.power(v, a).shape == (7,)


class TestConfigureDrive:
    """Tests for payload and direction handling."""

    def test_lifting_gravity_by_direction(self):
        """Gravity of cabin and payload pulls against up-travel and drives down-travel."""
        base = load_power_model(None, Drive.LIFTING)

        up = configure_drive(base, 1000.0, 1, lifting=True)
        down = configure_drive(base, 1000.0, -1, lifting=True)

        assert up.gravity_term == pytest.approx(base.gravity_term + 9810.0)
        assert down.gravity_term == pytest.approx(-up.gravity_term)
        assert up.effective_mass == pytest.approx(base.effective_mass + 1000.0)

    def test_running_gear_has_no_gravity(self):
        base = load_power_model(None, Drive.RUNNING)

        assert configure_drive(base, 1000.0, -1, lifting=False).gravity_term == 0.0

    def test_invalid_direction(self):
        with pytest.raises(DomainError):
            configure_drive(load_power_model(None, Drive.RUNNING), 0.0, 0, lifting=False)


class TestDerivatives:
    """Tests for finite-difference derivatives."""

    def test_finite_differences(self):
        """Central differences reproduce the analytic derivatives."""
        v = np.array([0.5, 1.0, 2.5])
        a = np.array([-0.3, 0.0, 0.4])

        p_v, p_va, p_aa = derivatives(_Smooth(), v, a, v_scale=3.0, a_scale=0.5)

        np.testing.assert_allclose(p_v, 6 * v + 2 * a + a * a, rtol=1e-6)
        np.testing.assert_allclose(p_va, 2 + 2 * a, rtol=1e-5)
        np.testing.assert_allclose(p_aa, 10 + 2 * v, rtol=1e-5)

    def test_surrogate_is_exact(self, sample_surrogate):
        p_v, p_va, p_aa = derivatives(sample_surrogate, np.array([1.0]), np.array([0.2]))

        assert p_v[0] == pytest.approx(100.0 + 4.0)
        assert p_va[0] == 0.0
        assert p_aa[0] == pytest.approx(10.0)

    def test_first_partials(self):
        v = np.array([0.5, 1.0, 2.5])
        a = np.array([-0.3, 0.0, 0.4])

        p_v, p_a = first_partials(_Smooth(), v, a, v_scale=3.0, a_scale=0.5)

        np.testing.assert_allclose(p_v, 6 * v + 2 * a + a * a, rtol=1e-6)
        np.testing.assert_allclose(p_a, 10 * a + 2 * v + 2 * v * a, rtol=1e-6, atol=1e-8)

    def test_first_partials_of_surrogate(self, sample_surrogate):
        p_v, p_a = first_partials(sample_surrogate, np.array([1.0]), np.array([0.2]))

        assert p_v[0] == pytest.approx(104.0)
        assert p_a[0] == pytest.approx(2.0)


class TestFitQuadratic:
    """Tests for the least-squares surrogate."""

    def test_recovers_quadratic(self):
        """A member of the model class is fitted exactly."""
        domain = FitDomain(v_min=0.0, v_max=3.0, a_min=-0.5, a_max=0.5)
        target = QuadraticSurrogate(c00=100, c10=20, c01=5, c20=3, c02=5, c11=2, fit_domain=domain)

        fitted = fit_quadratic(target, domain)

        np.testing.assert_allclose(fitted.coefficients, target.coefficients, rtol=1e-9, atol=1e-9)
        assert fitted.fit_residual == pytest.approx(0.0, abs=1e-8)
        assert not fitted.c02_clamped

    def test_clamps_concave_fit(self):
        """A fit concave in a is clamped to a small positive c02."""
        domain = FitDomain(v_min=0.0, v_max=3.0, a_min=-0.5, a_max=0.5)
        concave = QuadraticSurrogate(c00=0, c10=1, c01=0, c20=0, c02=-1, c11=0, fit_domain=domain)

        fitted = fit_quadratic(concave, domain)

        assert fitted.c02_clamped
        assert fitted.c02 > 0.0

    def test_degenerate_domain(self):
        with pytest.raises(DomainError):
            fit_quadratic(_Smooth(), FitDomain(v_min=1.0, v_max=1.0, a_min=-0.5, a_max=0.5))

    def test_running_gear_fit(self, running_model, running_limits):
        """The running gear is convex in a over its admissible box."""
        fitted = fit_quadratic(running_model, fit_domain_for(running_limits))

        assert fitted.c02 > 0.0
        assert fitted.fit_residual < characteristic_power(running_model, running_limits)


class TestNominalEfficiency:
    """Tests for the calibration anchor."""

    def test_running_gear_near_81_percent(self):
        """The packaged running gear is about 81 % efficient at the nominal motor point."""
        assert nominal_efficiency(load_power_model(None, Drive.RUNNING)) == pytest.approx(0.81, abs=0.01)

    def test_rejects_nonpositive_power(self):
        with pytest.raises(DomainError):
            nominal_efficiency(load_power_model(None, Drive.RUNNING), mech_power=0.0)


class TestSlowProfile:
    """Tests for P_slow(t)."""

    def test_follows_the_trajectory(self, running_model, running_limits):
        """Sampled power equals P(v(t), a(t)); standstill draws standby power."""
        traj = time_minimal_profile(10.0, running_limits).padded(20.0)

        profile = slow_profile(traj, running_model)

        assert profile.T == pytest.approx(20.0)
        assert float(profile(19.5)) == pytest.approx(running_model.standby_loss)
        _, v, a, _ = traj.sample(np.array([3.0]))
        assert float(profile(3.0)) == pytest.approx(float(running_model.power(v, a)[0]), rel=1e-3)

    def test_constant(self):
        profile = SlowPowerProfile.constant(5.0, 42.0)

        assert float(profile(2.5)) == pytest.approx(42.0)
        assert profile.T == 5.0

    def test_rejects_bad_grid(self):
        with pytest.raises(DomainError):
            SlowPowerProfile(np.array([1.0, 2.0]), np.array([0.0, 0.0]))

    def test_derivative(self):
        """The slope of a linear profile, held flat outside the horizon."""
        profile = SlowPowerProfile(np.array([0.0, 10.0]), np.array([-100.0, 100.0]))

        slope = profile.derivative(np.array([-1.0, 0.0, 5.0, 10.0, 11.0]))

        assert slope.tolist() == pytest.approx([0.0, 20.0, 20.0, 20.0, 0.0])
