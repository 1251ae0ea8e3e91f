import numpy as np
import pytest

from rendezsim import FieldParams, RobotState, Role, ScenarioConfig


def make_states(poses, informed=1):
    """poses: list of (x, y, theta); ids assigned 1..n in order."""
    return [RobotState(i + 1, np.array([x, y]), th,
                       Role.INFORMED if i + 1 == informed else Role.FOLLOWER)
            for i, (x, y, th) in enumerate(poses)]


def small_config(**overrides):
    """Three robots in a line, one informed, everything valid."""
    defaults = dict(
        n_robots=3, workspace_radius=30.0, sensing_radius=2.0,
        rendezvous_radius=5.0, collision_margin=0.4, connectivity_buffer=0.4,
        sigmoid_eps=0.01, dipolar_eps=0.5, field_exponent=1.2,
        linear_gains=[2.0, 4.0, 4.0], angular_gains=[8.0, 8.0, 8.0],
        goal_position=np.zeros(2), goal_heading=0.0,
        time_step=0.005, horizon=60.0,
        initial_states=make_states([(-4.0, -2.0, 0.5), (-4.8, -2.5, -1.0),
                                    (-3.4, -2.9, 2.0)]),
        gradient_floor=1e-6,
    )
    defaults.update(overrides)
    return ScenarioConfig(**defaults)


@pytest.fixture
def params_s5():
    """Field constants of the six-robot reference setup."""
    return FieldParams(
        workspace_radius=50.0, sensing_radius=2.0, rendezvous_radius=11.5,
        collision_margin=0.4, connectivity_buffer=0.4, sigmoid_eps=0.01,
        dipolar_eps=0.01, field_exponent=1.2, goal_position=np.zeros(2),
        goal_heading=0.0, n_robots=6)


@pytest.fixture
def params_fig2():
    """Field constants matching the wider sigmoid illustration."""
    return FieldParams(
        workspace_radius=50.0, sensing_radius=2.0, rendezvous_radius=11.5,
        collision_margin=0.5, connectivity_buffer=1.0, sigmoid_eps=0.01,
        dipolar_eps=0.01, field_exponent=1.2, goal_position=np.zeros(2),
        goal_heading=0.0, n_robots=6)
