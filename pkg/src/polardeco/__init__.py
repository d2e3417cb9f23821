"""Collisional decoherence of polar molecules in near-field matter-wave interferometers."""

__version__ = "0.1.0"

__all__ = ["__version__"]
