"""Exact PL essential-line algebra and rotation machinery for lifted annulus maps."""

__version__ = "0.1.0"
