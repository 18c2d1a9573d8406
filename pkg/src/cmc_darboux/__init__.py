"""Darboux transforms of constant mean curvature surfaces via a flat connection family."""

__version__ = "0.1.0"
