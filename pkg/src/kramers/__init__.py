"""Intense-pulse ionization of a hydrogenic atom in the Kramers (velocity) gauge."""

__version__ = "0.1.0"
