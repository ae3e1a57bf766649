"""Potential theory for the elliptic operator with one line of degeneration.

Layer potentials built on hypergeometric fundamental solutions, a Nystrom
solver for the second-kind boundary integral equations, Green's functions
(including the closed hemisphere form) and a solver for the mixed
Dirichlet / weighted-flux boundary value problem.
"""

from .kernel import Params

__all__ = ["Params"]
__version__ = "0.1.0"
