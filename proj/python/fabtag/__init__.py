"""Payload embedding for 3D prints with simulated thermal and near-infrared readout."""

from fabtag._core import *  # noqa: F401,F403
from fabtag._core import __doc__  # noqa: F401
