"""Numerical laboratory for fronts of the Burgers-FKPP equation

    u_t + beta*u*u_x = u_xx + u - u^2.

Subpackages by concern:

- ``grid``: uniform meshes, sampled fields, discrete calculus
- ``waves``: traveling waves by phase-plane shooting, minimal speeds, tails
- ``evolve``: IMEX time integration on moving-window domains
- ``transforms``: weighted Hopf-Cole transform, conservation-law and
  dissipation functionals, weighted Nash and rearrangement checks
- ``fronts``: front tracking and asymptotic-expansion fitting
- ``cli``: reproducible experiment runner and acceptance suite
"""

from . import evolve, grid, waves  # noqa: F401

__version__ = "0.1.0"
