"""Hyperfine donor spins, flux-qubit magnetometry and species decomposition."""

from ._core import *  # noqa: F401,F403
from ._core import __version__
