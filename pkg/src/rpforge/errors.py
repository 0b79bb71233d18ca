"""Exception types shared across the package."""


class CertificationError(RuntimeError):
    """A facet of the convex hull could not be certified within tolerance."""


class QuotientError(RuntimeError):
    """The antipodal quotient of a triangulation is not a simplicial complex."""


class WitnessError(RuntimeError):
    """A constructive search failed where the family's conditions guarantee success.

    Signals either an implementation bug or an input family that violates
    the combinatorial hypotheses it was claimed to satisfy.
    """
