"""End-to-end tests of the optimizer.

These run real solves and take minutes.
Run with: pytest tests/integration/ -m integration
"""
