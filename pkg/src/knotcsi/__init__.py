"""Configuration space integrals for knots and links."""

__version__ = "0.1.0"
