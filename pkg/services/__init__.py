"""Interval arithmetic, models, contraction, refinement, metrics and the run harness."""
