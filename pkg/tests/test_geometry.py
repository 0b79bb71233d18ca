"""Embeddings, exact inner products, certified hulls, and the witness finder.

The hull oracle is an independent brute-force facet enumeration: every
n-subset of vertices proposes a hyperplane, which is kept when all other
vertices lie strictly on one side; coplanar vertices are absorbed and
the resulting facet sets deduplicated.  The certified lattice must agree
exactly on small instances.
"""

import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

import rpforge as rp
from rpforge.errors import WitnessError
from rpforge.exact import ExactScalar
from rpforge.family import elements_of
from rpforge.geometry import _support_value, lattice_to_dict, lattice_to_off


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------

def brute_force_facets(points: np.ndarray, tol: float = 1e-9) -> set[frozenset]:
    """All maximal coplanar vertex sets lying on supporting hyperplanes."""
    m, n = points.shape
    facets = set()
    for combo in itertools.combinations(range(m), n):
        A = points[list(combo)]
        # hyperplane <x, u> = 1 through the n chosen points (skip if origin-near
        # or degenerate: these cannot support a facet of our polytopes)
        try:
            u = np.linalg.solve(A, np.ones(n))
        except np.linalg.LinAlgError:
            continue
        vals = points @ u
        if np.all(vals <= 1 + tol):
            on = frozenset(int(i) for i in np.nonzero(vals >= 1 - tol)[0])
            if len(on) >= n:
                facets.add(on)
    return facets


def lattice_facet_sets(L) -> set[frozenset]:
    return {frozenset(f) for f in L.facets}


# ---------------------------------------------------------------------------
# embedding and inner products
# ---------------------------------------------------------------------------

def test_embed_examples():
    v = rp.SignedVertex((1,), 1)
    assert np.allclose(rp.embed(v, 2), [1, 0])
    v = rp.SignedVertex((1, 2), 1)
    assert np.allclose(rp.embed(v, 2), [1 / math.sqrt(2)] * 2)
    v = rp.SignedVertex((1, 3), -1)
    assert np.allclose(rp.embed(v, 3), [-1 / math.sqrt(2), 0, -1 / math.sqrt(2)])


def test_embed_unit_norm():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(1, 10)
        size = rng.randint(1, n)
        els = tuple(sorted(rng.sample(range(1, n + 1), size)))
        v = rp.SignedVertex(els, rng.choice((1, -1)))
        assert abs(np.linalg.norm(rp.embed(v, n)) - 1) < 2 ** -40
        assert rp.inner_vertices(v, v) == 1


def test_inner_vertices_examples():
    u = rp.SignedVertex((1, 2), 1)
    v = rp.SignedVertex((2, 3), 1)
    assert rp.inner_vertices(u, v) == ExactScalar(1, 4)
    assert rp.inner_vertices(u, v) == Fraction(1, 2)
    w = rp.SignedVertex((1,), 1)
    assert rp.inner_vertices(w, -w) == -1
    assert rp.inner_vertices(u, -v) == -rp.inner_vertices(u, v)
    assert rp.inner_vertices(v, u) == rp.inner_vertices(u, v)


def test_inner_rational_examples():
    A = rp.SignedVertex((1, 2), 1)
    assert rp.inner_rational([1, 2, 3], A) == ExactScalar(3, 2)
    assert rp.inner_rational([0, 0, 0], A).is_zero()
    B = rp.SignedVertex((1, 2, 3, 4), 1)
    assert rp.inner_rational([1, 1, 1, 1], B) == 2


def test_inner_matches_float():
    rng = random.Random(5)
    for _ in range(300):
        n = rng.randint(2, 8)
        su = tuple(sorted(rng.sample(range(1, n + 1), rng.randint(1, n))))
        sv = tuple(sorted(rng.sample(range(1, n + 1), rng.randint(1, n))))
        u = rp.SignedVertex(su, rng.choice((1, -1)))
        v = rp.SignedVertex(sv, rng.choice((1, -1)))
        exact = float(rp.inner_vertices(u, v))
        approx = float(np.dot(rp.embed(u, n), rp.embed(v, n)))
        assert abs(exact - approx) < 1e-12


# ---------------------------------------------------------------------------
# certified hull vs. the brute-force oracle
# ---------------------------------------------------------------------------

def test_hull_segment_n1():
    V = rp.SubsetFamily.from_sets(1, [(1,)])
    L = rp.convex_hull(V)
    assert len(L.vertices) == 2
    assert L.facets == ((0,), (1,))


def test_hull_hexagon(chain):
    c = chain(2, "single")
    L = c.lattice
    assert len(L.vertices) == 6
    assert len(L.facets) == 6
    assert all(len(f) == 2 for f in L.facets)
    pts = L.coordinates()
    assert lattice_facet_sets(L) == brute_force_facets(pts)


def test_hull_n3_full_family(chain):
    c = chain(3, "single")
    L = c.lattice
    assert len(L.vertices) == 14
    assert lattice_facet_sets(L) == brute_force_facets(L.coordinates())


def test_hull_n4_grouped_oracle(chain):
    c = chain(4, "grouped")
    L = c.lattice
    assert len(L.vertices) == 28
    assert lattice_facet_sets(L) == brute_force_facets(L.coordinates())


def test_hull_requires_singletons():
    V = rp.SubsetFamily.from_sets(3, [(1,), (2,), (1, 2), (1, 2, 3)])
    with pytest.raises(ValueError):
        rp.convex_hull(V)


def test_hull_central_symmetry(chain):
    for key in ((3, "single"), (4, "grouped"), (5, "grouped")):
        L = chain(*key).lattice
        ant = L.antipode
        fsets = lattice_facet_sets(L)
        for f in L.facets:
            assert frozenset(ant[v] for v in f) in fsets


def test_hull_precision_independence(chain):
    """Doubling the working precision must not change the combinatorics."""
    c = chain(4, "grouped")
    L512 = rp.convex_hull(c.V, precision=512)
    assert L512.facets == c.lattice.facets


def test_all_vertices_on_some_facet(chain):
    for key in ((2, "single"), (3, "single"), (4, "grouped")):
        L = chain(*key).lattice
        used = set()
        for f in L.facets:
            used.update(f)
        assert used == set(range(len(L.vertices)))


# ---------------------------------------------------------------------------
# orthant and antipodal-disjointness checks
# ---------------------------------------------------------------------------

def test_orthant_property_passes(chain):
    for key in ((2, "single"), (3, "single"), (4, "grouped"), (5, "grouped")):
        L = chain(*key).lattice
        assert rp.check_orthant_property(L).passed


def test_orthant_property_contradiction():
    # a synthetic "facet" containing +{1} and -{1} must fail
    verts = (rp.SignedVertex((1,), 1), rp.SignedVertex((1,), -1),
             rp.SignedVertex((2,), 1), rp.SignedVertex((2,), -1))
    L = rp.FaceLattice(2, verts, ((0, 1),), ((1.0, 0.0),), (0.0,),
                       precision=64, eps=1e-9, min_margin=1.0)
    report = rp.check_orthant_property(L)
    assert not report.passed
    assert report.violations[0][0] == "facet-not-in-orthant"


def test_antipodal_disjoint_passes(chain):
    for key in ((2, "single"), (3, "single"), (4, "grouped")):
        L = chain(*key).lattice
        assert rp.check_antipodal_disjoint(L).passed


def test_antipodal_disjoint_fails_on_square():
    """The square from the singleton-only family: adjacent edges share e2."""
    V = rp.SubsetFamily.from_sets(2, [(1,), (2,)])
    L = rp.convex_hull(V)
    assert len(L.facets) == 4
    report = rp.check_antipodal_disjoint(L)
    assert not report.passed
    kinds = {v[0] for v in report.violations}
    assert kinds == {"overlapping-antipodal-facets"}


def test_antipodal_disjoint_fails_on_octahedron():
    V = rp.SubsetFamily.from_sets(3, [(1,), (2,), (3,)])
    L = rp.convex_hull(V)
    assert len(L.facets) == 8
    assert not rp.check_antipodal_disjoint(L).passed


# ---------------------------------------------------------------------------
# smaller-support witness finder
# ---------------------------------------------------------------------------

def scan_for_witness(V, x, target):
    """Exhaustive oracle: all members beating the target support value."""
    hits = []
    for m in V.members:
        if _support_value([Fraction(t) for t in x], m) > target:
            hits.append(elements_of(m))
    return hits


def test_witness_grow_case():
    V = rp.build_grouped_family(rp.make_partition(3, 1))
    C = rp.smaller_support_witness((1,), (2,), [1, 1, 0], V)
    assert C == (1, 2)
    val = _support_value([Fraction(1), Fraction(1), Fraction(0)], 0b011)
    assert val > ExactScalar(1)


def test_witness_rejects_untied_pair():
    V = rp.build_grouped_family(rp.make_partition(2, 1))
    with pytest.raises(ValueError):
        rp.smaller_support_witness((1,), (2,), [1, 0], V)


def test_witness_validated_against_scan():
    V = rp.build_grouped_family(rp.make_partition(3, 1))
    x = [1, 1, 5]
    C = rp.smaller_support_witness((1,), (2,), x, V)
    target = _support_value([Fraction(t) for t in x], 0b001)
    assert _support_value([Fraction(t) for t in x], rp.family.mask_of(C, 3)) > target
    assert C in scan_for_witness(V, x, target)


def test_witness_zero_tie_case():
    V = rp.build_grouped_family(rp.make_partition(4, 2))
    # x vanishes on A and B, positive elsewhere: a singleton wins
    C = rp.smaller_support_witness((1,), (2,), [0, 0, 3, 0], V)
    assert C == (3,)


def test_witness_error_on_nonconforming_family():
    """A family violating the exchange condition defeats the search."""
    V = rp.SubsetFamily.from_sets(2, [(1,), (2,)])
    with pytest.raises(WitnessError):
        rp.smaller_support_witness((1,), (2,), [1, 1], V)


def test_witness_argument_errors():
    V = rp.build_grouped_family(rp.make_partition(3, 1))
    with pytest.raises(ValueError):
        rp.smaller_support_witness((1, 2), (2, 3), [1, 1, 1], V)   # overlap
    with pytest.raises(ValueError):
        rp.smaller_support_witness((1,), (2,), [0, 0, 0], V)       # zero x
    with pytest.raises(ValueError):
        rp.smaller_support_witness((1,), (2,), [-1, -1, 0], V)     # negative
    with pytest.raises(ValueError):
        rp.smaller_support_witness((1,), (4,), [1, 1, 1], V)       # not members


def test_witness_randomized_same_size_pairs():
    rng = random.Random(404)
    trials = 0
    while trials < 400:
        n = rng.randint(2, 10)
        k = rng.randint(1, n)
        V = rp.build_grouped_family(rp.make_partition(n, k))
        members = list(V.members)
        a, b = rng.choice(members), rng.choice(members)
        if a & b or a == b or a.bit_count() != b.bit_count():
            continue
        x = [rng.randint(0, 8) for _ in range(n)]
        # retune one coordinate of A so the support sums agree exactly
        i_star = elements_of(a)[0]
        sum_a_rest = sum(x[e - 1] for e in elements_of(a) if e != i_star)
        sum_b = sum(x[e - 1] for e in elements_of(b))
        if sum_b - sum_a_rest < 0:
            continue
        x[i_star - 1] = sum_b - sum_a_rest
        if all(t == 0 for t in x):
            continue
        target = _support_value([Fraction(t) for t in x], a)
        assert target == _support_value([Fraction(t) for t in x], b)
        C = rp.smaller_support_witness(a, b, x, V, exhaustive_fallback=True)
        assert _support_value([Fraction(t) for t in x],
                              rp.family.mask_of(C, n)) > target
        assert C in scan_for_witness(V, x, target)
        trials += 1


# ---------------------------------------------------------------------------
# export formats
# ---------------------------------------------------------------------------

def test_lattice_json_shape(chain):
    L = chain(2, "single").lattice
    data = lattice_to_dict(L)
    assert data["n"] == 2
    assert {"set": [1], "sign": 1} in data["vertices"]
    assert all(len(f) == 2 for f in data["facets"])


def test_lattice_off_export(chain):
    L = chain(3, "single").lattice
    text = lattice_to_off(L, digits=12)
    lines = text.strip().split("\n")
    assert lines[0] == "OFF"
    counts = lines[1].split()
    assert counts[0] == "14" and counts[1] == "24"
    hexa = lattice_to_off(chain(2, "single").lattice)
    assert hexa.startswith("nOFF\n2\n")
