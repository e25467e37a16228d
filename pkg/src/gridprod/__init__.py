"""Products of coordinates over lattice grids."""

__version__ = "0.1.0"
