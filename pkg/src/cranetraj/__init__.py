"""crane-traj - energy-optimal trajectories for dual-drive stacker cranes."""

__version__ = "0.1.0"
