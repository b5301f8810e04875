"""Pytest configuration and fixtures."""

import pytest


@pytest.fixture
def running_limits():
    """Kinematic limits of the reference running gear."""
    from cranetraj.models.kinematics import KinematicLimits

    return KinematicLimits(v_max=3.0, a_max=0.5, j_max=1.0)


@pytest.fixture
def lifting_limits():
    """Kinematic limits of the reference lifting gear."""
    from cranetraj.models.kinematics import KinematicLimits

    return KinematicLimits(v_max=0.9, a_max=0.6, j_max=0.6)


@pytest.fixture
def run_config():
    """Default run configuration."""
    from cranetraj.config import RunConfig

    return RunConfig()


@pytest.fixture
def running_model():
    """Packaged running-gear power model with the default payload."""
    from cranetraj.config import load_power_model
    from cranetraj.models.kinematics import Drive
    from cranetraj.powerflow import configure_drive

    return configure_drive(load_power_model(None, Drive.RUNNING), 1000.0, 1, lifting=False)


@pytest.fixture
def sample_surrogate():
    """Convex quadratic surrogate with a known closed-form EL solution."""
    from cranetraj.models.power import FitDomain, QuadraticSurrogate

    return QuadraticSurrogate(
        c00=500.0,
        c10=100.0,
        c01=0.0,
        c20=2.0,
        c02=5.0,
        c11=0.0,
        fit_domain=FitDomain(v_min=0.0, v_max=3.0, a_min=-0.5, a_max=0.5),
    )


@pytest.fixture
def travel_problem(run_config):
    """Running gear optimized while the lifting gear climbs 20 m (30 m horizontal)."""
    from cranetraj.energymap import build_problem
    from cranetraj.models.kinematics import TravelSpec
    from cranetraj.models.problem import Objective

    travel = TravelSpec(s_x=30.0, s_y=20.0)
    problem, _, _ = build_problem(travel, run_config, Objective.CONSUMPTION)
    return problem


@pytest.fixture(autouse=True)
def fresh_decision_logger():
    """Each test starts without a global decision logger."""
    from cranetraj.utils import reset_logger

    reset_logger()
    yield
    reset_logger()
