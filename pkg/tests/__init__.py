"""Test suite for crane-traj."""
