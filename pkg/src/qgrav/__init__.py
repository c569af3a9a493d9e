"""Metric of quantum states: symbolic construction, curvature and field-equation checks."""

__version__ = "0.1.0"
