"""Pressure metric on metric graphs and degenerating hyperbolic surfaces."""

from ._pmetric import *  # noqa: F401,F403
from ._pmetric import __version__  # noqa: F401
