"""Joint-angle estimation from plantar pressure distributions."""

from ._plantar import *  # noqa: F401,F403
from ._plantar import PlantarError, stats  # noqa: F401

__version__ = "0.1.0"
