"""Gaussian model of two-photon interference and time-bin entanglement swapping."""

from ._tbswap import *  # noqa: F401,F403
from ._tbswap import __doc__  # noqa: F401
