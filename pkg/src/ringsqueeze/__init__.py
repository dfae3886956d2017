"""Spin-squeezed Sagnac interferometer simulator for a spin-1 condensate in a ring."""

__version__ = "0.1.0"
