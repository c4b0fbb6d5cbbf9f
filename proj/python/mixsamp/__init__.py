"""Sampling estimators for time-dependent mixed-state expectation values."""

from mixsamp._core import *  # noqa: F401,F403
from mixsamp._core import __version__  # noqa: F401
