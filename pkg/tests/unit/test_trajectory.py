"""Tests for piecewise trajectories and their energy integrals."""

import numpy as np
import pytest

from cranetraj.errors import DomainError
from cranetraj.kinematics import time_minimal_profile
from cranetraj.models.power import PowerModel
from cranetraj.powerflow import SlowPowerProfile
from cranetraj.trajectory import (
    Segment,
    SegmentKind,
    Trajectory,
    _split_at_roots,
    check_bounds,
    distance,
    energies,
    evaluate,
    to_dict,
)


@pytest.fixture
def standby_model():
    """A drive that only draws its standby power while at rest."""
    return PowerModel(name="standby", effective_mass=1.0, standby_loss=100.0)


class TestSegment:
    """Tests for single intervals."""

    def test_ramp_end_state(self):
        """A jerk ramp from rest: v = j·t²/2, a = j·t."""
        segment = Segment.ramp(0.0, 0.0, 1.0, 2.0)

        assert segment.end_state == pytest.approx((2.0, 2.0))
        assert segment.displacement == pytest.approx(8.0 / 6.0)
        assert segment.label == "CD_j+"

    def test_labels(self):
        assert Segment.slope(1.0, -0.5, 1.0).label == "CD_a-"
        assert Segment.cruise(3.0, 1.0).label == "CD_v"
        assert Segment.cruise(0.0, 1.0).label == "CD_v0"

    def test_rejects_zero_duration(self):
        with pytest.raises(DomainError):
            Segment.cruise(1.0, 0.0)

    def test_cruise_needs_zero_acceleration(self):
        with pytest.raises(DomainError):
            Segment(SegmentKind.CD_V, 1.0, 1.0, 0.5)

    def test_el_needs_arc(self):
        with pytest.raises(DomainError):
            Segment(SegmentKind.EL, 1.0, 1.0, 0.0)


class TestTrajectory:
    """Tests for trajectory construction and sampling."""

    def test_idle(self):
        idle = Trajectory.idle()

        assert idle.T == 0.0
        assert idle.n_segments == 0
        assert distance(idle) == 0.0

    def test_padded_and_delayed(self, running_limits):
        """Standstill is appended or prepended without changing the distance."""
        profile = time_minimal_profile(10.0, running_limits)

        padded = profile.padded(20.0)
        delayed = profile.delayed(20.0)

        assert padded.T == pytest.approx(20.0)
        assert delayed.T == pytest.approx(20.0)
        assert padded.labels[-1] == "CD_v0"
        assert delayed.labels[0] == "CD_v0"
        assert distance(padded) == pytest.approx(10.0)
        assert distance(delayed) == pytest.approx(10.0)

    def test_padding_cannot_shorten(self, running_limits):
        profile = time_minimal_profile(10.0, running_limits)

        with pytest.raises(DomainError):
            profile.padded(profile.T - 1.0)

    def test_evaluate_matches_sample(self, running_limits):
        """Scalar and vectorized evaluation agree."""
        profile = time_minimal_profile(30.0, running_limits)
        t = np.linspace(0.0, profile.T, 17)
        x, v, a, j = profile.sample(t)

        for k, tk in enumerate(t):
            assert evaluate(profile, tk) == pytest.approx((x[k], v[k], a[k], j[k]))

    def test_evaluate_end_points(self, running_limits):
        """Rest at both ends, full distance at T."""
        profile = time_minimal_profile(30.0, running_limits)

        assert evaluate(profile, 0.0) == pytest.approx((0.0, 0.0, 0.0, 1.0))
        x, v, a, _ = evaluate(profile, profile.T)
        assert (x, v, a) == pytest.approx((30.0, 0.0, 0.0), abs=1e-9)

    def test_evaluate_outside_horizon(self, running_limits):
        profile = time_minimal_profile(30.0, running_limits)

        with pytest.raises(DomainError):
            evaluate(profile, profile.T + 1.0)

    def test_invalid_direction(self):
        with pytest.raises(DomainError):
            Trajectory((Segment.cruise(0.0, 1.0),), direction_sign=0)

    def test_check_bounds_detects_violation(self, running_limits):
        """A cruise above v_max and a missing stop are both reported."""
        traj = Trajectory((Segment.cruise(4.0, 1.0),))
        bounds = check_bounds(traj, running_limits)

        assert bounds.velocity_violation == pytest.approx(1.0)
        assert bounds.boundary_defect == pytest.approx(4.0)
        assert not bounds.ok()

    def test_to_dict(self, running_limits):
        """Segments are listed and the sample table ends at T."""
        profile = time_minimal_profile(30.0, running_limits)
        data = to_dict(profile, sample_dt=0.5)

        assert data["T"] == pytest.approx(16.5)
        assert data["distance"] == pytest.approx(30.0)
        assert [s["label"] for s in data["segments"]] == profile.labels
        assert data["samples"]["t"][-1] == pytest.approx(16.5)
        assert len(data["samples"]["v"]) == len(data["samples"]["t"])

    def test_to_dict_rejects_bad_step(self, running_limits):
        with pytest.raises(DomainError):
            to_dict(time_minimal_profile(1.0, running_limits), sample_dt=0.0)


class TestEnergies:
    """Tests for the exact energy integrals."""

    def test_constant_power(self, standby_model):
        """Standby plus a constant slow-drive power over 10 s."""
        report = energies(Trajectory.dwell(10.0), standby_model, SlowPowerProfile.constant(10.0, 50.0))

        assert report.E_con == pytest.approx(1500.0)
        assert report.E_rec == pytest.approx(1500.0)
        assert report.T == pytest.approx(10.0)

    def test_net_regeneration(self, standby_model):
        """A regenerating slow drive makes E_con negative; E_rec stays positive."""
        report = energies(Trajectory.dwell(10.0), standby_model, SlowPowerProfile.constant(10.0, -200.0))

        assert report.E_con == pytest.approx(-1000.0)
        assert report.E_rec == pytest.approx(1000.0)

    def test_sign_change_inside_interval(self):
        """|P| is integrated exactly across a zero crossing."""
        model = PowerModel(name="still", effective_mass=1.0)
        p_slow = SlowPowerProfile(np.array([0.0, 10.0]), np.array([-100.0, 100.0]))

        report = energies(Trajectory.dwell(10.0), model, p_slow)

        assert report.E_con == pytest.approx(0.0, abs=1e-6)
        assert report.E_rec == pytest.approx(500.0, rel=1e-9)

    def test_kinetic_energy_of_a_move(self, running_limits):
        """A lossless drive spends nothing net on a move from rest to rest."""
        model = PowerModel(name="lossless", effective_mass=1000.0)
        profile = time_minimal_profile(10.0, running_limits)

        report = energies(profile, model, SlowPowerProfile.constant(profile.T))

        assert report.E_con == pytest.approx(0.0, abs=1e-4)
        assert report.E_rec > 0.0

    def test_horizon_mismatch(self, standby_model):
        with pytest.raises(DomainError):
            energies(Trajectory.dwell(10.0), standby_model, SlowPowerProfile.constant(11.0))


class TestRootSplitting:
    """Tests for splitting integration intervals at zeros of the integrand."""

    def test_close_root_pair(self):
        """Two roots between neighbouring scan points are both found."""
        lo, hi, _ = _split_at_roots(lambda t: (t - 0.51) ** 2 - 1e-6, np.array([0.0]), np.array([1.0]))

        assert len(lo) == 3
        assert hi[0] == pytest.approx(0.509, abs=1e-8)
        assert hi[1] == pytest.approx(0.511, abs=1e-8)
        assert lo[1:].tolist() == hi[:-1].tolist()

    def test_touching_minimum_is_not_split(self):
        """A positive minimum between scan points leaves the interval whole."""
        lo, hi, _ = _split_at_roots(lambda t: (t - 0.51) ** 2 + 1e-6, np.array([0.0]), np.array([1.0]))

        assert lo.tolist() == [0.0]
        assert hi.tolist() == [1.0]

    def test_simple_sign_change(self):
        lo, hi, scale = _split_at_roots(lambda t: t - 0.3, np.array([0.0]), np.array([1.0]))

        assert hi[0] == pytest.approx(0.3, abs=1e-8)
        assert scale > 0.0
