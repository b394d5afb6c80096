"""Numerical laboratory for radial diffusions on rotationally symmetric manifolds.

The package builds model manifolds (warped products with a pole) carrying
radial potentials, and verifies at desk scale the quantitative machinery
connecting curvature/Hessian conditions to measure concentration, coupling,
Harnack inequalities and contractivity of the associated diffusion
semigroup.  See README.md for the suite layout and CLI usage.
"""

__version__ = "0.1.0"
