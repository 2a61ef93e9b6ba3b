"""Iterative data-consistent inversion: weighted-KDE density-ratio updates
cycled over QoI subspaces, plus an exact discrete reference implementation."""

from ._idci import *  # noqa: F401,F403
from ._idci import IdciError, __doc__  # noqa: F401
