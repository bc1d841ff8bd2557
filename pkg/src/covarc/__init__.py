"""Classification engine and lower bounds for strength-2 covering arrays."""

from covarc.arrays import CoveringArray

__all__ = ["CoveringArray"]
__version__ = "0.1.0"
