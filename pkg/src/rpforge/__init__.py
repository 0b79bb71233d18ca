"""rpforge: certified small centrally symmetric polytopes and the
triangulations of real projective space they induce.

The pipeline runs family construction -> combinatorial condition checks
-> certified convex hull -> equivariant pulling triangulation ->
antipodal quotient -> homology certification.
"""

from .errors import CertificationError, QuotientError, WitnessError
from .exact import ExactScalar
from .family import (ConditionReport, GroupPartition, SubsetFamily,
                     block_sizes, build_grouped_family, check_all,
                     check_downward_closed, check_exchange, check_singletons,
                     count_from_block_sizes, count_grouped_family, default_k,
                     exchange_pair_witness, exchange_witness_grouped,
                     make_partition, maximal_group, size_bound)
from .geometry import (FaceLattice, SignedVertex, check_antipodal_disjoint,
                       check_orthant_property, convex_hull, embed,
                       inner_rational, inner_vertices, signed_vertices,
                       smaller_support_witness)
from .homology import (ChainComplexData, HomologyResult, boundary_matrices,
                       check_pseudomanifold, classify_low_dimensional,
                       expected_rp_homology, gf2_rank, homology,
                       smith_normal_form)
from .triangulation import (Involution, SimplicialComplex, check_equivariance,
                            check_star_disjointness, pull_triangulate, quotient)

__version__ = "0.1.0"

__all__ = [
    "CertificationError", "QuotientError", "WitnessError",
    "ExactScalar",
    "ConditionReport", "GroupPartition", "SubsetFamily",
    "block_sizes", "build_grouped_family", "check_all",
    "check_downward_closed", "check_exchange", "check_singletons",
    "count_from_block_sizes", "count_grouped_family", "default_k",
    "exchange_pair_witness", "exchange_witness_grouped",
    "make_partition", "maximal_group", "size_bound",
    "FaceLattice", "SignedVertex", "check_antipodal_disjoint",
    "check_orthant_property", "convex_hull", "embed", "inner_rational",
    "inner_vertices", "signed_vertices", "smaller_support_witness",
    "ChainComplexData", "HomologyResult", "boundary_matrices",
    "check_pseudomanifold", "classify_low_dimensional",
    "expected_rp_homology", "gf2_rank", "homology", "smith_normal_form",
    "Involution", "SimplicialComplex", "check_equivariance",
    "check_star_disjointness", "pull_triangulate", "quotient",
    "__version__",
]
