"""Numerical laboratory for the 3D radial Zakharov system below the ground-state threshold."""

__version__ = "0.1.0"
