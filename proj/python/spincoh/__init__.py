"""Spin-qubit decoherence analysis toolkit.

Coherence simulation under dynamical decoupling, noise-spectrum extraction
and fitting, spin-bath classification, and spherical band-bending solves.
The heavy lifting lives in the C++ extension ``spincoh._core``.
"""

from spincoh._core import *  # noqa: F401,F403
from spincoh._core import __version__  # noqa: F401
