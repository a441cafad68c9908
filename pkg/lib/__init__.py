"""
Torus Bundle Holonomy Library

This library provides tools for computing, classifying and certifying
the holonomy groups of flat connections on vector bundles over the 2-torus.
"""

__version__ = "0.1.0"
