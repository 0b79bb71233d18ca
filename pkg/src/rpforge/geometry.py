"""Geometry of the centrally symmetric polytope spanned by subset vertices.

Each family member A is embedded as the unit vector with coordinates
1/sqrt(|A|) on A and 0 elsewhere; the polytope is the convex hull of
these vectors and their negatives.  The face lattice is proposed in
double precision (Qhull) and then certified at configurable multiple
precision: every facet hyperplane is re-solved, every vertex is
classified against it, and the global structure (central symmetry,
ridge regularity, vertex coverage) is re-verified.  A facet that cannot
be certified raises instead of degrading to a warning, because all
downstream topology depends on the combinatorics being right.

Sign predicates that the boundary arguments rely on (inner products of
vertices with each other or with rational vectors) are evaluated in
exact arithmetic via ExactScalar, never in floating point.
"""

from __future__ import annotations

import logging
import multiprocessing
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import mpmath
import numpy as np
from scipy.spatial import ConvexHull

from .errors import CertificationError, WitnessError
from .exact import ExactScalar
from .family import (ConditionReport, SubsetFamily, as_mask, elements_of,
                     exchange_pair_witness)

log = logging.getLogger("rpforge.geometry")

DEFAULT_PRECISION = 256
DEFAULT_EPS = 2.0 ** -64


# ---------------------------------------------------------------------------
# signed vertices and inner products
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignedVertex:
    """A nonempty subset together with a global sign."""

    elements: tuple[int, ...]
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not self.elements:
            raise ValueError("subset must be nonempty")
        object.__setattr__(self, "elements", tuple(sorted(self.elements)))

    @property
    def size(self) -> int:
        return len(self.elements)

    def mask(self) -> int:
        m = 0
        for e in self.elements:
            m |= 1 << (e - 1)
        return m

    def __neg__(self) -> "SignedVertex":
        return SignedVertex(self.elements, -self.sign)


def signed_vertices(V: SubsetFamily) -> tuple[SignedVertex, ...]:
    """Vertex list of P(V): members in canonical order, + before -."""
    out = []
    for m in V.members:
        els = elements_of(m)
        out.append(SignedVertex(els, 1))
        out.append(SignedVertex(els, -1))
    return tuple(out)


def embed(v: SignedVertex, n: int) -> np.ndarray:
    """Embed as the unit vector with sign/sqrt(|A|) on the support."""
    if v.elements[-1] > n:
        raise ValueError(f"vertex {v} does not fit in dimension {n}")
    coord = v.sign / np.sqrt(v.size)
    x = np.zeros(n)
    for e in v.elements:
        x[e - 1] = coord
    return x


def inner_vertices(u: SignedVertex, v: SignedVertex) -> ExactScalar:
    """Exact inner product of two embedded vertices."""
    common = len(set(u.elements) & set(v.elements))
    return ExactScalar(Fraction(u.sign * v.sign * common), u.size * v.size)


def inner_rational(x: Sequence, v: SignedVertex) -> ExactScalar:
    """Exact inner product of a rational vector with an embedded vertex."""
    total = Fraction(0)
    for e in v.elements:
        total += Fraction(x[e - 1])
    return ExactScalar(v.sign * total, v.size)


def _support_value(x: Sequence[Fraction], mask: int) -> ExactScalar:
    """Exact <x, A> for a positive subset vertex given as a mask."""
    total = Fraction(0)
    size = 0
    e = 0
    while mask:
        if mask & 1:
            total += x[e]
            size += 1
        mask >>= 1
        e += 1
    return ExactScalar(total, size)


# ---------------------------------------------------------------------------
# face lattice
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FaceLattice:
    """Certified boundary combinatorics of P(V).

    `facets[i]` is the sorted tuple of vertex indices on facet i;
    `normals[i]`/`offsets[i]` describe its supporting hyperplane (unit
    outer normal, double-precision view of the certified values).
    `min_margin` is the smallest certified separation, relative to the
    supporting offset, between any facet plane and the vertices off it.
    """

    n: int
    vertices: tuple[SignedVertex, ...]
    facets: tuple[tuple[int, ...], ...]
    normals: tuple[tuple[float, ...], ...]
    offsets: tuple[float, ...]
    precision: int
    eps: float
    min_margin: float

    @cached_property
    def antipode(self) -> tuple[int, ...]:
        """antipode[i] is the index of -vertices[i]."""
        index = {(v.elements, v.sign): i for i, v in enumerate(self.vertices)}
        return tuple(index[(v.elements, -v.sign)] for v in self.vertices)

    @cached_property
    def vertex_facets(self) -> tuple[tuple[int, ...], ...]:
        """For each vertex, the facets containing it."""
        incident = [[] for _ in self.vertices]
        for fi, f in enumerate(self.facets):
            for v in f:
                incident[v].append(fi)
        return tuple(tuple(l) for l in incident)

    def coordinates(self) -> np.ndarray:
        return np.array([embed(v, self.n) for v in self.vertices])

    def f_vector_boundary(self) -> tuple[int, int]:
        return (len(self.vertices), len(self.facets))


def _mp_inv_sqrts(sizes: Iterable[int]) -> dict:
    return {s: 1 / mpmath.sqrt(s) for s in set(sizes)}


def _mp_dot(mask: int, sign_coord, u) -> mpmath.mpf:
    """<p, u> for the sparse vertex (support mask, signed coordinate)."""
    total = mpmath.mpf(0)
    i = 0
    while mask:
        if mask & 1:
            total += u[i]
        i += 1
        mask >>= 1
    return total * sign_coord


def _certify_worker(payload):
    """Certify a chunk of candidate facets at working precision.

    payload = (n, vdata, candidates, precision, eps)
    vdata = list of (support mask, size, sign) per vertex
    Returns (facet vertex tuple, unit normal floats, offset float,
    margin float) per candidate, or raises CertificationError.
    """
    n, vdata, candidates, precision, eps_f = payload
    out = []
    with mpmath.workprec(precision):
        eps = mpmath.mpf(eps_f)
        inv = _mp_inv_sqrts(size for (_, size, _) in vdata)
        coords = [(mask, sign * inv[size]) for (mask, size, sign) in vdata]

        def solve(idxs):
            m = len(idxs)
            A = mpmath.matrix(m, n)
            for r, w in enumerate(idxs):
                mask, c = coords[w]
                i = 0
                while mask:
                    if mask & 1:
                        A[r, i] = c
                    i += 1
                    mask >>= 1
            At = A.T
            try:
                return mpmath.lu_solve(At * A, At * mpmath.matrix([1] * m))
            except ZeroDivisionError as exc:
                raise CertificationError(
                    f"degenerate facet candidate {sorted(idxs)}") from exc

        for cand in candidates:
            current = sorted(cand)
            for _ in range(4):
                u = solve(current)
                on = []
                worst = None
                for idx, (mask, c) in enumerate(coords):
                    d = _mp_dot(mask, c, u) - 1
                    if abs(d) <= eps:
                        on.append(idx)
                    elif d > 0:
                        raise CertificationError(
                            f"vertex {idx} lies {mpmath.nstr(d, 8)} above the "
                            f"candidate facet {current}")
                    else:
                        if worst is None or d > worst:
                            worst = d
                if on == current:
                    break
                current = on
            else:
                raise CertificationError(
                    f"facet candidate {sorted(cand)} did not stabilise")
            if len(current) < n:
                raise CertificationError(
                    f"candidate {current} has fewer than {n} vertices on its plane")
            if worst is None:
                raise CertificationError("all vertices on one hyperplane")
            margin = -worst
            norm = mpmath.sqrt(mpmath.fsum(ui * ui for ui in u))
            out.append((tuple(current),
                        tuple(float(ui / norm) for ui in u),
                        float(1 / norm),
                        float(margin)))
    return out


def _segment_lattice(V: SubsetFamily, precision: int, eps: float) -> FaceLattice:
    verts = signed_vertices(V)
    return FaceLattice(1, verts, ((0,), (1,)), ((1.0,), (-1.0,)),
                       (1.0, 1.0), precision, eps, 2.0)


def convex_hull(V: SubsetFamily, precision: int = DEFAULT_PRECISION,
                eps: float = DEFAULT_EPS, jobs: int = 1) -> FaceLattice:
    """Certified face lattice of the polytope spanned by V and -V.

    Requires all singletons of {1,..,n} to be members (this makes the
    polytope full-dimensional with the origin interior, so every facet
    hyperplane can be normalised to <x, u> = 1).  Candidate facets come
    from a double-precision hull; each is then re-solved and separated
    at `precision` bits with on-plane tolerance `eps` (relative to the
    unit offset).  Facets of the certified lattice are maximal coplanar
    vertex sets, so genuinely non-simplicial facets come out merged.
    """
    n = V.n
    for i in range(1, n + 1):
        if (1 << (i - 1)) not in V.member_set:
            raise ValueError(f"singleton {{{i}}} missing: P(V) would not be "
                             f"full-dimensional")
    if precision < 64:
        raise ValueError("precision must be at least 64 bits")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if n == 1:
        return _segment_lattice(V, precision, eps)

    verts = signed_vertices(V)
    pts = np.array([embed(v, n) for v in verts])
    hull = ConvexHull(pts)
    if len(hull.vertices) != len(pts):
        raise CertificationError(
            f"only {len(hull.vertices)} of {len(pts)} input vertices are "
            f"extreme; inputs must be distinct unit vectors")
    log.debug("qhull: %d simplices for %d vertices", len(hull.simplices), len(pts))

    # sub-simplices of a merged facet inherit the facet's plane equation,
    # so grouping by equation recovers Qhull's merged facets
    grouped: dict[tuple, set[int]] = {}
    for simp, eq in zip(hull.simplices, hull.equations):
        grouped.setdefault(tuple(eq), set()).update(int(t) for t in simp)
    candidates = sorted({frozenset(s) for s in grouped.values()}, key=sorted)

    vdata = [(v.mask(), v.size, v.sign) for v in verts]
    if jobs > 1 and len(candidates) > 4 * jobs:
        chunks = [candidates[i::jobs] for i in range(jobs)]
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(jobs) as pool:
            results = pool.map(_certify_worker,
                               [(n, vdata, c, precision, eps) for c in chunks])
        records = [r for chunk in results for r in chunk]
    else:
        records = _certify_worker((n, vdata, candidates, precision, eps))

    by_set: dict[tuple[int, ...], tuple] = {}
    for rec in records:
        by_set.setdefault(rec[0], rec)
    facets = sorted(by_set)
    normals = tuple(by_set[f][1] for f in facets)
    offsets = tuple(by_set[f][2] for f in facets)
    min_margin = min(by_set[f][3] for f in facets)

    lattice = FaceLattice(n, verts, tuple(facets), normals, offsets,
                          precision, eps, min_margin)
    _verify_lattice_structure(lattice, pts)
    log.info("hull certified: %d vertices, %d facets, min margin %.3g "
             "(%.3g * eps)", len(verts), len(facets), min_margin,
             min_margin / eps)
    return lattice


def _affine_rank(points: np.ndarray, tol: float = 1e-9) -> int:
    if len(points) <= 1:
        return 0
    return int(np.linalg.matrix_rank(points[1:] - points[0], tol=tol))


def _verify_lattice_structure(L: FaceLattice, pts: np.ndarray) -> None:
    """Global combinatorial certificates beyond per-facet separation.

    Checks: every vertex is used; the facet set is closed under the
    antipodal map; every facet spans affine dimension n-1; every ridge
    (maximal proper intersection of two facets) spans n-2 and lies in
    exactly two facets.  Together with per-facet certification this
    pins the complete boundary: a certified facet set in which every
    ridge closes up cannot be a strict subset of the boundary.
    """
    n = L.n
    covered = set()
    for f in L.facets:
        covered.update(f)
    if len(covered) != len(L.vertices):
        missing = sorted(set(range(len(L.vertices))) - covered)
        raise CertificationError(f"vertices {missing} lie on no facet")

    facet_index = {f: i for i, f in enumerate(L.facets)}
    ant = L.antipode
    for f in L.facets:
        image = tuple(sorted(ant[v] for v in f))
        if image not in facet_index:
            raise CertificationError(
                f"facet {f} has no antipodal facet: symmetry broken")

    fmasks = [0] * len(L.facets)
    for fi, f in enumerate(L.facets):
        for v in f:
            fmasks[fi] |= 1 << v
    vert_facets = [set() for _ in L.vertices]
    for fi, f in enumerate(L.facets):
        if _affine_rank(pts[list(f)]) != n - 1:
            raise CertificationError(f"facet {f} does not span dimension {n - 1}")
        for v in f:
            vert_facets[v].add(fi)

    def facet_bits(mask: int) -> list[int]:
        out = []
        v = 0
        while mask:
            if mask & 1:
                out.append(v)
            v += 1
            mask >>= 1
        return out

    for fi, fm in enumerate(fmasks):
        neighbors = set()
        for v in L.facets[fi]:
            neighbors |= vert_facets[v]
        neighbors.discard(fi)
        inters = {fm & fmasks[fj] for fj in neighbors}
        inters.discard(0)
        ridges = [c for c in inters
                  if not any(c != d and c & d == c for d in inters)]
        for r in ridges:
            rverts = facet_bits(r)
            count = set.intersection(*(vert_facets[v] for v in rverts))
            if len(count) != 2:
                raise CertificationError(
                    f"ridge {rverts} lies in {len(count)} facets, expected 2")
            if _affine_rank(pts[rverts]) != n - 2:
                raise CertificationError(
                    f"ridge {rverts} does not span dimension {n - 2}")


# ---------------------------------------------------------------------------
# orthant and antipodal separation checks
# ---------------------------------------------------------------------------

def check_orthant_property(L: FaceLattice) -> ConditionReport:
    """Every facet must fit inside one closed coordinate orthant.

    Purely combinatorial: coordinate i of a vertex has the vertex's sign
    if i is in its subset and is 0 otherwise, so a facet fits an orthant
    exactly when no coordinate sees both signs among its vertices.
    """
    violations = []
    for fi, f in enumerate(L.facets):
        pos = 0
        neg = 0
        for vi in f:
            v = L.vertices[vi]
            if v.sign > 0:
                pos |= v.mask()
            else:
                neg |= v.mask()
        clash = pos & neg
        if clash:
            for e in elements_of(clash):
                violations.append(("facet-not-in-orthant", fi, e))
    return ConditionReport("orthant", tuple(violations))


def check_antipodal_disjoint(L: FaceLattice) -> ConditionReport:
    """No facet through a vertex may touch any facet through its negative.

    Faces are intersections of facets, so checking all facet pairs
    (G containing v, G' containing -v) for a common vertex covers every
    pair of faces separating v from -v.
    """
    violations = []
    fmasks = []
    for f in L.facets:
        m = 0
        for v in f:
            m |= 1 << v
        fmasks.append(m)
    ant = L.antipode
    vf = L.vertex_facets
    for vi in range(len(L.vertices)):
        wi = ant[vi]
        if wi < vi:
            continue
        for fa in vf[vi]:
            for fb in vf[wi]:
                shared = fmasks[fa] & fmasks[fb]
                if shared:
                    first = shared & -shared
                    violations.append(("overlapping-antipodal-facets", vi, wi,
                                       fa, fb, first.bit_length() - 1))
    return ConditionReport("antipodal-disjoint", tuple(violations))


# ---------------------------------------------------------------------------
# constructive support witness
# ---------------------------------------------------------------------------

def smaller_support_witness(A, B, x: Sequence, V: SubsetFamily,
                            exhaustive_fallback: bool = False):
    """A member C with exactly larger support value than a tied disjoint pair.

    Given disjoint members A, B and a nonnegative rational vector x with
    <A, x> = <B, x> exactly, returns C in V with <C, x> > <A, x>, decided
    entirely in exact arithmetic.  Such a C shows the tied pair cannot
    lie on a common facet with outer normal x: a facet's own vertices
    must maximise the support value, so a strictly larger value off the
    candidate plane contradicts facet maximality.

    Construction: if the tie value is 0, any singleton with a positive
    coordinate works.  Otherwise take an exchange witness (i, j) for
    (A, B); a strict coordinate gap lets the swapped member win
    directly, and with no strict gap one of "grow by the witness
    element" / "drop the support-minimal element" must win, because the
    support value as a function of the normalising denominator is
    strictly convex or non-constant linear.

    With `exhaustive_fallback` a full scan of V backs up the
    constructive search (meant for test builds); a search failure
    otherwise raises WitnessError, since the family's conditions
    guarantee existence.
    """
    n = V.n
    a = as_mask(A, n)
    b = as_mask(B, n)
    if a not in V.member_set or b not in V.member_set:
        raise ValueError("A and B must be members of V")
    if not a or not b:
        raise ValueError("A and B must be nonempty")
    if a & b:
        raise ValueError("A and B must be disjoint")
    if len(x) != n:
        raise ValueError(f"x must have {n} coordinates")
    xf = [Fraction(t) for t in x]
    if any(t < 0 for t in xf):
        raise ValueError("x must be coordinate-wise nonnegative")
    if all(t == 0 for t in xf):
        raise ValueError("x must not be the zero vector")
    target = _support_value(xf, a)
    if target != _support_value(xf, b):
        raise ValueError("support values of A and B must tie exactly")

    def value(mask: int) -> ExactScalar:
        return _support_value(xf, mask)

    def finish(mask: int):
        if mask in V.member_set and value(mask) > target:
            return elements_of(mask)
        return None

    # tie value zero: any singleton with a positive coordinate wins
    if target.is_zero():
        for e, t in enumerate(xf, start=1):
            if t > 0:
                c = finish(1 << (e - 1))
                if c is not None:
                    return c
        raise WitnessError("no positive-coordinate singleton is a member")

    w = exchange_pair_witness(V, a, b)
    if w is None:
        raise WitnessError("family violates the exchange condition for "
                           f"A={elements_of(a)}, B={elements_of(b)}")
    i, j, case = w
    ib, jb = 1 << (i - 1), 1 << (j - 1)

    # strict coordinate gap: the swapped member gains outright
    if case in ("3b", "both") and xf[i - 1] > xf[j - 1]:
        c = finish((b | ib) & ~jb)
        if c is not None:
            return c
    if case in ("3a", "both") and xf[j - 1] > xf[i - 1]:
        c = finish((a | jb) & ~ib)
        if c is not None:
            return c

    # convexity branch on the side whose grown set is known to be a member
    if case in ("3b", "both"):
        base, grow = a, jb
    else:
        base, grow = b, ib
    candidates = [base | grow]
    if base.bit_count() > 1:
        arg = None
        for e in elements_of(base):
            if arg is None or xf[e - 1] < xf[arg - 1]:
                arg = e
        candidates.append(base & ~(1 << (arg - 1)))
    best = None
    best_val = target
    for cand in candidates:
        if cand in V.member_set:
            val = value(cand)
            if val > best_val:
                best, best_val = cand, val
    if best is not None:
        return elements_of(best)

    if exhaustive_fallback:
        for m in V.members:
            if value(m) > target:
                return elements_of(m)
    raise WitnessError(
        f"no witness found for A={elements_of(a)}, B={elements_of(b)}; "
        f"the family cannot satisfy the membership conditions")


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def lattice_to_dict(L: FaceLattice) -> dict:
    return {
        "n": L.n,
        "vertices": [{"set": list(v.elements), "sign": v.sign}
                     for v in L.vertices],
        "facets": [list(f) for f in L.facets],
    }


def lattice_to_off(L: FaceLattice, digits: int = 17) -> str:
    """nOFF-format dump of vertices and facets (plain OFF when n = 3)."""
    lines = []
    if L.n == 3:
        lines.append("OFF")
    else:
        lines.append("nOFF")
        lines.append(str(L.n))
    lines.append(f"{len(L.vertices)} {len(L.facets)} 0")
    for v in L.vertices:
        coords = embed(v, L.n)
        lines.append(" ".join(f"{c:.{digits}g}" for c in coords))
    for f in L.facets:
        lines.append(" ".join([str(len(f))] + [str(v) for v in f]))
    return "\n".join(lines) + "\n"
