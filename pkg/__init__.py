"""
hyperlab - a simulation-and-verification lab for sample-path regularity of
hypercontractive processes and fields.

The package simulates model processes on uniform grids, estimates the
hypercontractivity parameters (C0, iota), evaluates explicit
Garsia-Rodemich-Rumsey modulus bounds, Hoelder constants and supremum tail
bounds, and checks every bound pathwise and distributionally.
"""

# Import version information
from __version__ import __version__, __version_info__, VERSION_HISTORY

__all__ = ["__version__", "__version_info__", "VERSION_HISTORY"]
