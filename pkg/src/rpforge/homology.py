"""Simplicial homology over Z and Z/2 via integer Smith normal form.

Boundary matrices use the lexicographic orientation convention: faces of
each dimension are sorted, and the boundary of a simplex alternates
signs over the omitted-vertex positions.  The Smith reduction works on a
sparse representation with a smallest-pivot / least-fill strategy and
Python integers throughout, so entry growth is harmless.  Homology over
Z/2 only needs ranks, which are computed on bitmask rows.

The homology of the antipodal quotient is the computable certificate
that the pipeline produced the intended space: together with the
pseudomanifold check (and, in low dimensions, vertex-link validation)
it pins down everything short of an actual homeomorphism test.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .family import ConditionReport
from .triangulation import SimplicialComplex


# ---------------------------------------------------------------------------
# chain complex data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainComplexData:
    """Faces per dimension and sparse boundary columns between them.

    boundaries[d] is a list over d-faces; each entry maps the row index
    of a (d-1)-face to the entry -1 or +1.
    """

    faces: dict[int, list[tuple]]
    boundaries: dict[int, list[dict[int, int]]]

    def f_vector(self) -> tuple[int, ...]:
        top = max(self.faces)
        return tuple(len(self.faces.get(d, ())) for d in range(top + 1))


def boundary_matrices(K: SimplicialComplex) -> ChainComplexData:
    """Build all boundary maps of the closure of K and verify dd = 0."""
    faces = K.faces_by_dim
    boundaries: dict[int, list[dict[int, int]]] = {}
    for d in range(1, K.dim + 1):
        index = {f: i for i, f in enumerate(faces.get(d - 1, ()))}
        cols = []
        for f in faces.get(d, ()):
            col = {}
            for j in range(len(f)):
                sub = f[:j] + f[j + 1:]
                col[index[sub]] = -1 if j % 2 else 1
            cols.append(col)
        boundaries[d] = cols
    for d in range(2, K.dim + 1):
        lower = boundaries[d - 1]
        for col in boundaries[d]:
            acc: dict[int, int] = {}
            for r, s in col.items():
                for r2, s2 in lower[r].items():
                    acc[r2] = acc.get(r2, 0) + s * s2
            if any(acc.values()):
                raise AssertionError(f"boundary composition nonzero in dim {d}")
    return ChainComplexData(dict(faces), boundaries)


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

def _snf_invariants(cols: list[dict[int, int]]) -> list[int]:
    """Invariant factors of a sparse integer matrix given by columns."""
    rows: dict[int, dict[int, int]] = {}
    colrows: dict[int, set[int]] = {}
    for c, col in enumerate(cols):
        for r, v in col.items():
            if v:
                rows.setdefault(r, {})[c] = v
                colrows.setdefault(c, set()).add(r)
    active_r = set(rows)
    active_c = set(colrows)
    diag: list[int] = []

    def addrow(dst: int, src: int, mult: int) -> None:
        rd = rows.setdefault(dst, {})
        for c, v in rows.get(src, {}).items():
            nv = rd.get(c, 0) + mult * v
            if nv:
                rd[c] = nv
                colrows.setdefault(c, set()).add(dst)
            else:
                del rd[c]
                colrows[c].discard(dst)
        if not rd:
            del rows[dst]

    def addcol(dst: int, src: int, mult: int) -> None:
        for r in list(colrows.get(src, ())):
            nv = rows[r].get(dst, 0) + mult * rows[r][src]
            if nv:
                rows[r][dst] = nv
                colrows.setdefault(dst, set()).add(r)
            else:
                del rows[r][dst]
                colrows[dst].discard(r)

    while True:
        best = None
        for r in list(active_r):
            rw = rows.get(r)
            if not rw:
                active_r.discard(r)
                continue
            fill_r = len(rw) - 1
            for c, v in rw.items():
                key = (abs(v), fill_r * (len(colrows[c]) - 1))
                if best is None or key < best[0]:
                    best = (key, r, c)
                    if key == (1, 0):
                        break
            if best and best[0] == (1, 0):
                break
        if best is None:
            break
        _, pr, pc = best
        while True:
            pv = rows[pr][pc]
            for r in [r for r in colrows[pc] if r != pr]:
                q = rows[r][pc] // pv
                if q:
                    addrow(r, pr, -q)
            leftover = [r for r in colrows.get(pc, ()) if r != pr]
            if leftover:
                # remainders smaller than the pivot appeared; continue Euclid
                pr = min(leftover, key=lambda r: abs(rows[r][pc]))
                continue
            pv = rows[pr][pc]
            for c in [c for c in rows[pr] if c != pc]:
                q = rows[pr][c] // pv
                if q:
                    addcol(c, pc, -q)
            leftover = [c for c in rows.get(pr, {}) if c != pc]
            if leftover:
                pc = min(leftover, key=lambda c: abs(rows[pr][c]))
                continue
            break
        diag.append(abs(rows[pr][pc]))
        active_r.discard(pr)
        active_c.discard(pc)
        for c in list(rows.get(pr, {})):
            colrows[c].discard(pr)
        rows.pop(pr, None)
        for r in list(colrows.get(pc, ())):
            del rows[r][pc]
        colrows.pop(pc, None)

    # repair the divisibility chain: diag(a, b) ~ diag(gcd, lcm)
    changed = True
    while changed:
        changed = False
        for i in range(len(diag)):
            for j in range(i + 1, len(diag)):
                if diag[j] % diag[i]:
                    g = gcd(diag[i], diag[j])
                    diag[i], diag[j] = g, diag[i] // g * diag[j]
                    changed = True
    diag.sort()
    return diag


def smith_normal_form(M) -> tuple[tuple[int, ...], int]:
    """Invariant factors (d1 | d2 | ...) and rank of an integer matrix.

    Accepts any row-major 2D structure (nested sequences or an array).
    """
    cols_count = 0
    cols: list[dict[int, int]] = []
    for r, row in enumerate(M):
        row = list(row)
        cols_count = max(cols_count, len(row))
        while len(cols) < len(row):
            cols.append({})
        for c, v in enumerate(row):
            v = int(v)
            if v:
                cols[c][r] = v
    inv = _snf_invariants(cols)
    return tuple(inv), len(inv)


def gf2_rank(cols: list[int]) -> int:
    """Rank over GF(2) of a matrix whose columns are given as bitmasks."""
    basis: dict[int, int] = {}
    rank = 0
    for col in cols:
        cur = col
        while cur:
            low = cur & -cur
            other = basis.get(low)
            if other is None:
                basis[low] = cur
                rank += 1
                break
            cur ^= other
    return rank


# ---------------------------------------------------------------------------
# homology
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomologyResult:
    """Per-dimension (rank, torsion coefficients) plus Euler characteristic."""

    coefficients: str
    groups: tuple[tuple[int, tuple[int, ...]], ...]
    euler: int

    def rank(self, d: int) -> int:
        return self.groups[d][0] if 0 <= d < len(self.groups) else 0

    def torsion(self, d: int) -> tuple[int, ...]:
        return self.groups[d][1] if 0 <= d < len(self.groups) else ()

    def describe(self) -> str:
        free = "Z/2" if self.coefficients == "Z2" else "Z"
        parts = []
        for d, (rank, tors) in enumerate(self.groups):
            terms = []
            if rank:
                terms.append(free if rank == 1 else f"({free})^{rank}")
            terms += [f"Z/{t}" for t in tors]
            parts.append(f"H_{d}={' + '.join(terms) if terms else '0'}")
        return ", ".join(parts)


def homology(K: SimplicialComplex, coefficients: str = "Z") -> HomologyResult:
    """Homology of K from Smith normal form (Z) or GF(2) ranks (Z2)."""
    if coefficients not in ("Z", "Z2"):
        raise ValueError("coefficients must be 'Z' or 'Z2'")
    data = boundary_matrices(K)
    dim = K.dim
    f = data.f_vector()
    ranks = [0] * (dim + 2)
    torsion: dict[int, tuple[int, ...]] = {}
    for d in range(1, dim + 1):
        if coefficients == "Z":
            inv = _snf_invariants(data.boundaries[d])
            ranks[d] = len(inv)
            torsion[d - 1] = tuple(x for x in inv if x > 1)
        else:
            cols = []
            for col in data.boundaries[d]:
                m = 0
                for r, v in col.items():
                    if v % 2:
                        m |= 1 << r
                cols.append(m)
            ranks[d] = gf2_rank(cols)
    groups = tuple((f[d] - ranks[d] - ranks[d + 1], torsion.get(d, ()))
                   for d in range(dim + 1))
    euler = sum((-1) ** d * fd for d, fd in enumerate(f))
    betti_sum = sum((-1) ** d * g[0] for d, g in enumerate(groups))
    if betti_sum != euler:
        raise AssertionError(
            f"Euler-Poincare identity violated: chi={euler}, "
            f"alternating betti sum={betti_sum}")
    return HomologyResult(coefficients, groups, euler)


def expected_rp_homology(m: int, coefficients: str = "Z") -> HomologyResult:
    """Reference homology of m-dimensional real projective space."""
    if m < 0:
        raise ValueError("dimension must be nonnegative")
    if coefficients == "Z2":
        groups = tuple((1, ()) for _ in range(m + 1))
    elif coefficients == "Z":
        out = [(1, ())]
        for d in range(1, m + 1):
            if d == m:
                out.append((1, ()) if m % 2 else (0, ()))
            elif d % 2:
                out.append((0, (2,)))
            else:
                out.append((0, ()))
        groups = tuple(out)
    else:
        raise ValueError("coefficients must be 'Z' or 'Z2'")
    euler = sum((-1) ** d * g[0] for d, g in enumerate(groups))
    return HomologyResult(coefficients, groups, euler)


# ---------------------------------------------------------------------------
# manifold-flavoured sanity checks
# ---------------------------------------------------------------------------

def check_pseudomanifold(K: SimplicialComplex) -> ConditionReport:
    """Closed pseudomanifold test: ridges in exactly two facets, facet graph connected."""
    if not K.is_pure:
        raise ValueError("pseudomanifold check requires a pure complex")
    m = K.dim
    violations = []
    if m == 0:
        if len(K.maximal_faces) != 2:
            violations.append(("not-a-zero-sphere", len(K.maximal_faces)))
        return ConditionReport("pseudomanifold", tuple(violations))
    ridge_count: dict[tuple, list[int]] = {}
    for fi, f in enumerate(K.maximal_faces):
        for j in range(len(f)):
            ridge_count.setdefault(f[:j] + f[j + 1:], []).append(fi)
    for ridge, fs in ridge_count.items():
        if len(fs) != 2:
            violations.append(("ridge-degree", ridge, len(fs)))
    if not violations:
        adj: dict[int, set[int]] = {i: set() for i in range(len(K.maximal_faces))}
        for fs in ridge_count.values():
            adj[fs[0]].add(fs[1])
            adj[fs[1]].add(fs[0])
        seen = {0}
        stack = [0]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        if len(seen) != len(K.maximal_faces):
            violations.append(("facet-graph-disconnected",
                               len(seen), len(K.maximal_faces)))
    return ConditionReport("pseudomanifold", tuple(violations))


def classify_low_dimensional(K: SimplicialComplex) -> str:
    """Identify a 1- or 2-dimensional complex as a closed manifold by links.

    Returns "S^1" for a single cycle; for surfaces validates that every
    vertex link is one closed cycle and names the surface from
    orientability (top Z-homology) and Euler characteristic.  Raises
    ValueError when the complex is not a closed manifold of dim <= 2.
    """
    if K.dim == 0:
        if len(K.labels) == 1:
            return "point"
        raise ValueError("disconnected 0-complex")
    if K.dim == 1:
        adj = K.adjacency
        if any(len(adj[v]) != 2 for v in K.labels):
            raise ValueError("not a closed 1-manifold: a vertex misses degree 2")
        if not check_pseudomanifold(K).passed:
            raise ValueError("1-complex is not a single closed cycle")
        return "S^1"
    if K.dim != 2:
        raise ValueError("classification implemented for dim <= 2 only")
    if not check_pseudomanifold(K).passed:
        raise ValueError("not a closed surface (pseudomanifold test failed)")
    for v in K.labels:
        link_adj: dict = {}
        for f in K.maximal_faces:
            if v in f:
                a, b = (u for u in f if u != v)
                link_adj.setdefault(a, set()).add(b)
                link_adj.setdefault(b, set()).add(a)
        if any(len(nbs) != 2 for nbs in link_adj.values()):
            raise ValueError(f"vertex {v} has a non-cycle link")
        start = next(iter(link_adj))
        seen = {start}
        stack = [start]
        while stack:
            for nb in link_adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        if len(seen) != len(link_adj):
            raise ValueError(f"vertex {v} has a disconnected link")
    h = homology(K, "Z")
    orientable = h.rank(2) == 1
    chi = h.euler
    if orientable:
        if chi == 2:
            return "S^2"
        if chi == 0:
            return "T^2"
        return f"orientable surface, chi={chi}"
    if chi == 1:
        return "RP^2"
    if chi == 0:
        return "Klein bottle"
    return f"non-orientable surface, chi={chi}"


def homology_to_dict(result: HomologyResult) -> dict:
    return {
        "coefficients": result.coefficients,
        "dims": [{"d": d, "rank": rank, "torsion": list(tors)}
                 for d, (rank, tors) in enumerate(result.groups)],
        "euler": result.euler,
    }
