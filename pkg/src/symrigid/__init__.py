"""symrigid: infinitesimal rigidity of symmetric plane frameworks.

Decides rigidity of bar-joint frameworks that are symmetric under a
reflection or a k-fold rotation, working on the quotient gain graph.  Both
free group actions and actions with fixed vertices are supported.
"""

from .groups import (
    CyclicGroup,
    ComplexField,
    PrimeField,
    GroupError,
    make_field,
    reflection_group,
    rotation_group,
)
from .gains import Edge, GainGraph, GainGraphError, ValidationError
from .sparsity import CountSpec, SparsityVerdict, gain_sparse, plain_count_ok, spanning_tight_subgraph, zjk_sparse
from .orbit import (
    orbit_matrix,
    random_symmetric_config,
    rho_j_isostatic,
    infinitesimally_rigid,
    trivial_motion_dims,
)
from .henneberg import Move, Certificate, apply_extension, find_admissible_reduction, certify_tight

__version__ = "0.1.0"

__all__ = [
    "CyclicGroup",
    "ComplexField",
    "PrimeField",
    "GroupError",
    "make_field",
    "reflection_group",
    "rotation_group",
    "Edge",
    "GainGraph",
    "GainGraphError",
    "ValidationError",
    "CountSpec",
    "SparsityVerdict",
    "gain_sparse",
    "plain_count_ok",
    "spanning_tight_subgraph",
    "zjk_sparse",
    "orbit_matrix",
    "random_symmetric_config",
    "rho_j_isostatic",
    "infinitesimally_rigid",
    "trivial_motion_dims",
    "Move",
    "Certificate",
    "apply_extension",
    "find_admissible_reduction",
    "certify_tight",
    "__version__",
]
