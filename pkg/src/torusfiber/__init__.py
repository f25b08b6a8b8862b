"""Balanced Lagrangian torus fibers of compact toric manifolds.

Exact Novikov-series arithmetic, the max-min fiber locator, leading term
equations of the potential function and their lifts, quantum cohomology
relations, and Floer cohomology diagnostics for toric surfaces.
"""

__version__ = "0.1.0"
