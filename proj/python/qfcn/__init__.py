"""Density-matrix QFCN simulator: gates, states, circuits, data, training."""

from qfcn._core import *  # noqa: F401,F403

__version__ = "0.1.0"
