"""Monte Carlo solver for mixed Dirichlet-Neumann Laplace problems on
polygonal / circular-arc domains and polyhedra, with a conformal-modulus and
rectangle-map pipeline built on top of the sampler."""

from .domain_model import (
    BoundaryCondition,
    BoundaryPiece,
    DomainSpec2D,
    Quadrilateral,
    conjugate,
    dirichlet_value,
    load_domain,
    parse_domain,
)
from .geometry2d import Arc, Segment

__version__ = "0.1.0"
