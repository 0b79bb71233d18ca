"""Equivariant pulling triangulation of the boundary and its antipodal quotient.

The boundary complex of the certified polytope is triangulated by
pulling vertices in an order where each vertex is immediately followed
by its negative.  Because no face of the boundary contains an antipodal
pair (the lattice precondition), the earliest vertex of a face and the
earliest vertex of the opposite face are themselves opposite, which
makes the pulled triangulation symmetric under the central involution
without introducing new vertices.  When the closed stars of opposite
vertices are disjoint, identifying antipodal pairs yields a genuine
simplicial complex on half the vertices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import CertificationError, QuotientError
from .family import ConditionReport
from .geometry import FaceLattice, check_antipodal_disjoint

log = logging.getLogger("rpforge.triangulation")


# ---------------------------------------------------------------------------
# simplicial complexes and involutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimplicialComplex:
    """Abstract simplicial complex given by its maximal faces.

    Faces are sorted tuples of labels; the face list is an antichain
    (no maximal face contains another).
    """

    maximal_faces: tuple[tuple, ...]

    def __post_init__(self):
        faces = []
        for f in self.maximal_faces:
            t = tuple(sorted(f))
            if len(set(t)) != len(t):
                raise ValueError(f"face {f} has repeated vertices")
            if not t:
                raise ValueError("empty face")
            faces.append(t)
        faces = sorted(set(faces))
        by_size: dict[int, list] = {}
        sizes = sorted({len(f) for f in faces})
        if len(sizes) > 1:
            for f in faces:
                by_size.setdefault(len(f), []).append(set(f))
            for f in faces:
                sf = set(f)
                for s in sizes:
                    if s <= len(f):
                        continue
                    if any(sf <= g for g in by_size.get(s, ())):
                        raise ValueError(f"maximal face {f} is contained in "
                                         f"a larger face")
        object.__setattr__(self, "maximal_faces", tuple(faces))

    @cached_property
    def labels(self) -> tuple:
        seen = set()
        for f in self.maximal_faces:
            seen.update(f)
        return tuple(sorted(seen))

    @property
    def dim(self) -> int:
        return max(len(f) for f in self.maximal_faces) - 1

    @property
    def is_pure(self) -> bool:
        return len({len(f) for f in self.maximal_faces}) == 1

    @cached_property
    def faces_by_dim(self) -> dict[int, list[tuple]]:
        """Downward closure, one sorted list per dimension."""
        out: dict[int, set] = {}
        for f in self.maximal_faces:
            for r in range(1, len(f) + 1):
                bucket = out.setdefault(r - 1, set())
                for sub in combinations(f, r):
                    bucket.add(sub)
        return {d: sorted(s) for d, s in out.items()}

    def f_vector(self) -> tuple[int, ...]:
        byd = self.faces_by_dim
        return tuple(len(byd.get(d, ())) for d in range(self.dim + 1))

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * fd for d, fd in enumerate(self.f_vector()))

    @cached_property
    def adjacency(self) -> dict:
        """vertex -> set of vertices sharing a face with it."""
        adj: dict = {v: set() for v in self.labels}
        for f in self.maximal_faces:
            for u in f:
                adj[u].update(f)
        for v, s in adj.items():
            s.discard(v)
        return adj


class Involution:
    """Fixed-point-free pairing on vertex labels (its own inverse)."""

    def __init__(self, pairing: dict):
        self._map = dict(pairing)
        for v, w in self._map.items():
            if v == w:
                raise ValueError(f"involution fixes {v}")
            if self._map.get(w) != v:
                raise ValueError(f"pairing is not an involution at {v} <-> {w}")

    def __call__(self, v):
        return self._map[v]

    @property
    def domain(self) -> frozenset:
        return frozenset(self._map)

    def covers(self, labels) -> bool:
        return set(labels) <= set(self._map)

    def face_image(self, face: tuple) -> tuple:
        return tuple(sorted(self._map[v] for v in face))


# ---------------------------------------------------------------------------
# pulling triangulation
# ---------------------------------------------------------------------------

def _bits(mask: int) -> list[int]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        v += 1
        mask >>= 1
    return out


def _pull_recursive(face: int, dim: int, children, memo: dict) -> tuple:
    """Cone the earliest vertex of the face over its pulled proper faces.

    A face whose vertex count is dim+1 is already a simplex and is
    returned as-is; otherwise each child facet avoiding the earliest
    vertex is triangulated recursively and coned.
    """
    hit = memo.get(face)
    if hit is not None:
        return hit
    vs = _bits(face)
    if len(vs) == dim + 1:
        out = (tuple(vs),)
    elif len(vs) < dim + 1:
        raise CertificationError(
            f"face {vs} has fewer vertices than its dimension {dim} allows")
    else:
        v = vs[0]
        simplices = []
        for child in children(face, dim):
            if not (child >> v) & 1:
                for s in _pull_recursive(child, dim - 1, children, memo):
                    simplices.append(tuple(sorted((v,) + s)))
        out = tuple(simplices)
    memo[face] = out
    return out


def pull_triangulate(L: FaceLattice) -> tuple[SimplicialComplex, Involution]:
    """Symmetric triangulation of the boundary by pulling antipodal pairs.

    Vertices are pulled in lattice order, where index 2t is a positive
    vertex immediately followed by its negative at 2t+1; this order is
    what makes the result equivariant.  Requires the lattice to pass the
    antipodal-disjointness check, otherwise a face could contain both
    members of a pair and symmetry would break.

    The result reuses the lattice's vertex indices as labels, is pure of
    dimension n-1, and satisfies the boundary-sphere Euler count.
    """
    pre = check_antipodal_disjoint(L)
    if not pre.passed:
        raise ValueError(
            f"lattice fails antipodal disjointness "
            f"({len(pre.violations)} violations); pulling would not be "
            f"equivariant")
    n = L.n
    pts = L.coordinates()

    fmasks = []
    for f in L.facets:
        m = 0
        for v in f:
            m |= 1 << v
        fmasks.append(m)
    vert_facets = [[] for _ in L.vertices]
    for fi, f in enumerate(L.facets):
        for v in f:
            vert_facets[v].append(fi)

    rank_checked: dict[int, int] = {}

    def affine_rank_of(face: int) -> int:
        r = rank_checked.get(face)
        if r is None:
            vs = _bits(face)
            sub = pts[vs]
            r = 0 if len(vs) <= 1 else int(
                np.linalg.matrix_rank(sub[1:] - sub[0], tol=1e-9))
            rank_checked[face] = r
        return r

    children_memo: dict[int, tuple] = {}

    def children(face: int, dim: int) -> tuple:
        hit = children_memo.get(face)
        if hit is not None:
            return hit
        touching = set()
        for v in _bits(face):
            touching.update(vert_facets[v])
        cands = set()
        for fi in touching:
            c = face & fmasks[fi]
            if c and c != face:
                cands.add(c)
        maximal = tuple(sorted(
            c for c in cands if not any(c != d and (c & d) == c for d in cands)))
        for c in maximal:
            if affine_rank_of(c) != dim - 1:
                raise CertificationError(
                    f"face {_bits(c)} of {_bits(face)} has affine rank "
                    f"{affine_rank_of(c)}, expected {dim - 1}")
        children_memo[face] = maximal
        return maximal

    memo: dict[int, tuple] = {}
    simplices: set[tuple[int, ...]] = set()
    for fm in fmasks:
        for s in _pull_recursive(fm, n - 1, children, memo):
            if s in simplices:
                raise CertificationError(f"pulling produced duplicate simplex {s}")
            simplices.add(s)
    if any(len(s) != n for s in simplices):
        raise CertificationError("pulling produced a simplex of wrong dimension")

    S = SimplicialComplex(tuple(sorted(simplices)))
    if set(S.labels) != set(range(len(L.vertices))):
        raise CertificationError("pulling lost or invented vertices")
    expected_chi = 1 + (-1) ** (n - 1)
    chi = S.euler_characteristic()
    if chi != expected_chi:
        raise CertificationError(
            f"pulled boundary has Euler characteristic {chi}, expected "
            f"{expected_chi}")
    inv = Involution({i: L.antipode[i] for i in range(len(L.vertices))})
    log.info("pulled triangulation: f-vector %s", S.f_vector())
    return S, inv


# ---------------------------------------------------------------------------
# equivariance and star disjointness
# ---------------------------------------------------------------------------

def check_equivariance(S: SimplicialComplex, inv: Involution) -> ConditionReport:
    """The involution must permute maximal faces and fix none of them."""
    if not inv.covers(S.labels):
        raise ValueError("involution does not cover the complex's vertices")
    face_set = set(S.maximal_faces)
    violations = []
    for f in S.maximal_faces:
        image = inv.face_image(f)
        if image not in face_set:
            violations.append(("image-not-a-face", f, image))
        elif image == f:
            violations.append(("fixed-face", f))
    return ConditionReport("equivariance", tuple(violations))


def check_star_disjointness(S: SimplicialComplex, inv: Involution) -> ConditionReport:
    """Closed stars of paired vertices must not share any vertex.

    Equivalent formulation used here: no face contains a pair, and no
    path of length two joins a vertex to its partner.
    """
    if not inv.covers(S.labels):
        raise ValueError("involution does not cover the complex's vertices")
    adj = S.adjacency
    violations = []
    for v in S.labels:
        w = inv(v)
        if w < v:
            continue
        if w in adj[v]:
            violations.append(("shared-face", v, w))
            continue
        star_v = adj[v] | {v}
        star_w = adj[w] | {w}
        common = star_v & star_w
        if common:
            violations.append(("stars-intersect", v, w, min(common)))
    return ConditionReport("star-disjointness", tuple(violations))


# ---------------------------------------------------------------------------
# quotient
# ---------------------------------------------------------------------------

def quotient(S: SimplicialComplex, inv: Involution) -> SimplicialComplex:
    """Identify each vertex with its partner; faces map to representative faces.

    Preconditions (verified): the involution is equivariant on S and has
    disjoint closed stars.  Each label maps to the smaller label of its
    pair, every face maps to a face with distinct labels, and exactly the
    two faces of an orbit collapse to each quotient face.
    """
    eq = check_equivariance(S, inv)
    if not eq.passed:
        raise ValueError(f"quotient precondition failed: {eq.summary()}")
    st = check_star_disjointness(S, inv)
    if not st.passed:
        raise ValueError(f"quotient precondition failed: {st.summary()}")

    def rep(v):
        w = inv(v)
        return v if v <= w else w

    image_faces: dict[tuple, list[tuple]] = {}
    for f in S.maximal_faces:
        q = tuple(sorted(rep(v) for v in f))
        if len(set(q)) != len(f):
            raise QuotientError(
                f"face {f} collapses onto repeated labels {q}")
        image_faces.setdefault(q, []).append(f)
    for q, pre in image_faces.items():
        if len(pre) != 2 or inv.face_image(pre[0]) != pre[1]:
            raise QuotientError(
                f"faces {pre} collide over quotient face {q} without being "
                f"an antipodal pair")
    K = SimplicialComplex(tuple(sorted(image_faces)))
    if 2 * len(K.labels) != len(S.labels):
        raise QuotientError(
            f"quotient has {len(K.labels)} vertices, expected "
            f"{len(S.labels) // 2}")
    log.info("quotient complex: f-vector %s", K.f_vector())
    return K


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def complex_to_dict(K: SimplicialComplex, label_names: dict | None = None) -> dict:
    """JSON form: vertex label list plus facets as indices into it."""
    labels = list(K.labels)
    index = {v: i for i, v in enumerate(labels)}
    if label_names:
        shown = [label_names[v] for v in labels]
    else:
        shown = [list(v) if isinstance(v, tuple) else v for v in labels]
    return {
        "vertices": shown,
        "facets": [[index[v] for v in f] for f in K.maximal_faces],
    }


def complex_to_text(K: SimplicialComplex) -> str:
    """One maximal face per line, space-separated 1-based vertex indices."""
    index = {v: i + 1 for i, v in enumerate(K.labels)}
    lines = [" ".join(str(index[v]) for v in f) for f in K.maximal_faces]
    return "\n".join(lines) + "\n"
