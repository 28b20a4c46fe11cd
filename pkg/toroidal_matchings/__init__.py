"""Toroidal matchings - the even/odd perfect matching bijection on toroidal grids."""

from importlib import metadata

try:
    __version__ = metadata.version("toroidal-matchings")
except metadata.PackageNotFoundError:
    __version__ = "0.0.0"
