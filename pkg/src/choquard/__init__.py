"""Numerical laboratory for the planar weighted Choquard equation."""
