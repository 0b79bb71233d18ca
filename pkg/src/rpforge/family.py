"""Subset families over the ground set {1,..,n}.

A family V of nonempty subsets labels the positive vertices of the
centrally symmetric polytope P(V).  This module builds the grouped
families (at most one partition block may contribute more than one
element to a member) and verifies the three combinatorial conditions
that make P(V) behave: singletons present, downward closure, and the
exchange condition for disjoint pairs.

Subsets are encoded as n-bit membership words (bit i-1 <-> element i),
which keeps every set operation O(1) for n <= 64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Iterator, Sequence

MAX_GROUND_SET = 64


# ---------------------------------------------------------------------------
# mask helpers
# ---------------------------------------------------------------------------

def mask_of(elements: Iterable[int], n: int) -> int:
    """Encode a collection of elements from {1,..,n} as a bitmask."""
    m = 0
    for e in elements:
        if not 1 <= e <= n:
            raise ValueError(f"element {e} outside ground set 1..{n}")
        m |= 1 << (e - 1)
    return m


def elements_of(mask: int) -> tuple[int, ...]:
    """Decode a bitmask into a sorted tuple of elements."""
    out = []
    e = 1
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return tuple(out)


def as_mask(subset, n: int) -> int:
    """Accept a subset given either as a bitmask or as an element iterable."""
    if isinstance(subset, int):
        if subset < 0 or subset >> n:
            raise ValueError(f"mask {subset:#x} outside ground set of size {n}")
        return subset
    return mask_of(subset, n)


def _canonical_key(mask: int) -> tuple:
    return (mask.bit_count(), elements_of(mask))


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupPartition:
    """Ordered partition of {1,..,n} into blocks of almost equal size."""

    n: int
    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_GROUND_SET:
            raise ValueError(f"ground set size must be in 1..{MAX_GROUND_SET}")
        object.__setattr__(self, "groups",
                           tuple(tuple(sorted(g)) for g in self.groups))
        seen = 0
        for g in self.groups:
            if not g:
                raise ValueError("empty group")
            gm = mask_of(g, self.n)
            if seen & gm:
                raise ValueError("groups are not disjoint")
            seen |= gm
        if seen != (1 << self.n) - 1:
            raise ValueError("groups do not cover the ground set")
        sizes = [len(g) for g in self.groups]
        if max(sizes) - min(sizes) > 1:
            raise ValueError("group sizes differ by more than 1")
        if max(sizes) > self.max_group_size:
            raise ValueError("a group exceeds ceil(n/k)")

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def max_group_size(self) -> int:
        """s = ceil(n/k), the largest allowed block size."""
        return -(-self.n // self.k)

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(mask_of(g, self.n) for g in self.groups)


@dataclass(frozen=True)
class SubsetFamily:
    """A set of nonempty subsets of {1,..,n}, canonically ordered.

    Members are stored as bitmasks sorted by (size, lexicographic
    element order); the same order is used for serialization and for
    building vertex lists downstream.
    """

    n: int
    members: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_GROUND_SET:
            raise ValueError(f"ground set size must be in 1..{MAX_GROUND_SET}")
        full = (1 << self.n) - 1
        uniq = set()
        for m in self.members:
            if m == 0:
                raise ValueError("empty set cannot be a member")
            if m & ~full:
                raise ValueError(f"member {m:#x} outside ground set")
            if m in uniq:
                raise ValueError(f"duplicate member {elements_of(m)}")
            uniq.add(m)
        object.__setattr__(self, "members",
                           tuple(sorted(uniq, key=_canonical_key)))

    @classmethod
    def from_sets(cls, n: int, sets: Iterable[Iterable[int]]) -> "SubsetFamily":
        return cls(n, tuple(mask_of(s, n) for s in sets))

    @property
    def member_set(self) -> frozenset:
        return frozenset(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, subset) -> bool:
        return as_mask(subset, self.n) in self.member_set

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def element_sets(self) -> list[tuple[int, ...]]:
        return [elements_of(m) for m in self.members]

    def to_dict(self, partition: GroupPartition | None = None) -> dict:
        return {
            "n": self.n,
            "groups": [list(g) for g in partition.groups] if partition else None,
            "members": [list(elements_of(m)) for m in self.members],
        }

    @classmethod
    def from_dict(cls, data: dict) -> tuple["SubsetFamily", GroupPartition | None]:
        fam = cls.from_sets(data["n"], data["members"])
        part = None
        if data.get("groups"):
            part = GroupPartition(data["n"], tuple(tuple(g) for g in data["groups"]))
        return fam, part


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of one combinatorial or geometric condition check."""

    condition: str
    violations: tuple = ()
    witnesses: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.passed

    def summary(self) -> str:
        state = "pass" if self.passed else f"FAIL ({len(self.violations)} violations)"
        return f"{self.condition}: {state}"


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def default_k(n: int) -> int:
    """Number of partition blocks: ceil(sqrt(n))."""
    if n < 1:
        raise ValueError("n must be positive")
    k = math.isqrt(n)
    return k if k * k == n else k + 1


def make_partition(n: int, k: int) -> GroupPartition:
    """Partition {1,..,n} into k consecutive blocks of almost equal size."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    base, rem = divmod(n, k)
    groups = []
    start = 1
    for j in range(k):
        size = base + (1 if j < rem else 0)
        groups.append(tuple(range(start, start + size)))
        start += size
    return GroupPartition(n, tuple(groups))


def build_grouped_family(p: GroupPartition) -> SubsetFamily:
    """All nonempty subsets meeting every block, except at most one, in <= 1 element.

    Built constructively, block by block, so the cost is proportional to
    the family size rather than to 2**n.
    """
    gmasks = p.masks
    k = p.k
    # per-block "small" options: nothing or a single element
    small = [(0,) + tuple(1 << (e - 1) for e in g) for g in p.groups]
    members = set()
    for combo in product(*small):
        m = 0
        for c in combo:
            m |= c
        if m:
            members.add(m)
    # one exceptional block contributes >= 2 elements
    for j, g in enumerate(p.groups):
        bits = [1 << (e - 1) for e in g]
        for r in range(2, len(g) + 1):
            for chosen in combinations(bits, r):
                base = 0
                for c in chosen:
                    base |= c
                rest = small[:j] + small[j + 1:]
                for combo in product(*rest):
                    m = base
                    for c in combo:
                        m |= c
                    members.add(m)
    return SubsetFamily(p.n, tuple(members))


def count_from_block_sizes(sizes: Sequence[int]) -> int:
    """Exact grouped-family size from the block sizes alone.

    Splits on the exceptional block: either no block contributes more
    than one element (product of (1+size) choices, minus the empty set),
    or exactly one block g contributes a subset of size >= 2.  The two
    classes are disjoint, so the sum is exact.  Works for arbitrarily
    large ground sets since no subsets are materialised.
    """
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError("block sizes must be positive")
    n0 = 1
    for s in sizes:
        n0 *= 1 + s
    n0 -= 1
    n1 = 0
    for j, s in enumerate(sizes):
        big = (1 << s) - 1 - s  # subsets of the block with >= 2 elements
        rest = 1
        for i, t in enumerate(sizes):
            if i != j:
                rest *= 1 + t
        n1 += big * rest
    return n0 + n1


def count_grouped_family(p: GroupPartition) -> int:
    """Exact size of build_grouped_family(p) via the closed-form block count."""
    return count_from_block_sizes([len(g) for g in p.groups])


def block_sizes(n: int, k: int) -> list[int]:
    """Sizes of the consecutive blocks make_partition(n, k) would use."""
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    base, rem = divmod(n, k)
    return [base + 1] * rem + [base] * (k - rem)


def size_bound(k: int, s: int) -> int:
    """The counting bound 2**s * (s+1)**(k-1) * k (strict upper bound on |V|)."""
    if k < 1 or s < 1:
        raise ValueError("k and s must be positive")
    return (1 << s) * (s + 1) ** (k - 1) * k


def maximal_group(subset, p: GroupPartition) -> int:
    """Index of a block meeting the subset in the most elements.

    Ties break to the smallest block index.
    """
    m = as_mask(subset, p.n)
    if m == 0:
        raise ValueError("subset must be nonempty")
    best, best_count = 0, -1
    for j, gm in enumerate(p.masks):
        c = (m & gm).bit_count()
        if c > best_count:
            best, best_count = j, c
    return best


# ---------------------------------------------------------------------------
# condition checks
# ---------------------------------------------------------------------------

def check_singletons(V: SubsetFamily) -> ConditionReport:
    """Every singleton {i} must be a member."""
    missing = tuple(i for i in range(1, V.n + 1)
                    if (1 << (i - 1)) not in V.member_set)
    return ConditionReport("singletons",
                           tuple(("missing-singleton", i) for i in missing))


def check_downward_closed(V: SubsetFamily) -> ConditionReport:
    """Removing any element from a member with >= 2 elements stays a member."""
    violations = []
    mset = V.member_set
    for m in V.members:
        if m.bit_count() < 2:
            continue
        mm = m
        while mm:
            low = mm & -mm
            if (m & ~low) not in mset:
                violations.append(("not-closed", elements_of(m),
                                   low.bit_length()))
            mm ^= low
    return ConditionReport("downward-closed", tuple(violations))


def _bit_elements(mask: int) -> list[int]:
    out = []
    e = 1
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return out


def exchange_pair_witness(V: SubsetFamily, A, B) -> tuple | None:
    """First (i, j, case) in lexicographic (i, j) order satisfying the exchange
    condition for the disjoint pair (A, B), or None if no pair of elements works.

    Case "3a": B+i and A+j-i are members; case "3b": A+j and B+i-j are
    members; "both" when the same (i, j) satisfies the two at once.
    """
    n = V.n
    a = as_mask(A, n)
    b = as_mask(B, n)
    if a & b:
        raise ValueError("A and B must be disjoint")
    if not a or not b:
        raise ValueError("A and B must be nonempty")
    mset = V.member_set
    for i in _bit_elements(a):
        ib = 1 << (i - 1)
        for j in _bit_elements(b):
            jb = 1 << (j - 1)
            case_a = (b | ib) in mset and ((a | jb) & ~ib) in mset
            case_b = (a | jb) in mset and ((b | ib) & ~jb) in mset
            if case_a and case_b:
                return (i, j, "both")
            if case_a:
                return (i, j, "3a")
            if case_b:
                return (i, j, "3b")
    return None


def check_exchange(V: SubsetFamily, collect_witnesses: bool = False) -> ConditionReport:
    """Exchange condition over every unordered disjoint pair of members.

    For each pair the first witness (i, j, case) in lexicographic order is
    found; a pair with no witness is recorded as a violation.  The witness
    search is inlined (it can run over millions of pairs); consistency
    with exchange_pair_witness is covered by tests.  Witness collection
    is optional because the pair set can be large.
    """
    violations = []
    witnesses = []
    members = V.members
    mset = V.member_set
    index = {m: t for t, m in enumerate(members)}
    n = V.n
    full = (1 << n) - 1
    bit_cache = {m: tuple((e, 1 << (e - 1)) for e in elements_of(m))
                 for m in members}
    for t, a in enumerate(members):
        comp = full & ~a
        # enumerate disjoint partners after A in canonical order via the
        # cheaper of: walking submasks of the complement, or scanning members
        if (1 << comp.bit_count()) < len(members):
            hits = []
            sub = comp
            while sub:
                tb = index.get(sub)
                if tb is not None and tb > t:
                    hits.append(tb)
                sub = (sub - 1) & comp
            hits.sort()
            partners = [members[tb] for tb in hits]
        else:
            partners = [b for b in members[t + 1:] if not a & b]
        bits_a = bit_cache[a]
        for b in partners:
            w = None
            for i, ib in bits_a:
                grown_b = b | ib          # first clause of case 3a
                has_3a = grown_b in mset
                a_less_i = a & ~ib
                for j, jb in bit_cache[b]:
                    case_a = has_3a and (a_less_i | jb) in mset
                    case_b = (a | jb) in mset and (grown_b & ~jb) in mset
                    if case_a or case_b:
                        w = (i, j, "both" if case_a and case_b
                             else "3a" if case_a else "3b")
                        break
                if w is not None:
                    break
            if w is None:
                violations.append(("no-exchange-witness",
                                   elements_of(a), elements_of(b)))
            elif collect_witnesses:
                witnesses.append((elements_of(a), elements_of(b)) + w)
    return ConditionReport("exchange", tuple(violations), tuple(witnesses))


def check_all(V: SubsetFamily) -> list[ConditionReport]:
    """Run the three membership conditions in order."""
    return [check_singletons(V), check_downward_closed(V), check_exchange(V)]


def exchange_witness_grouped(A, B, p: GroupPartition,
                             V: SubsetFamily | None = None) -> tuple[int, int, str]:
    """Constructive exchange witness for two disjoint grouped-family members.

    Follows the block structure: if A meets B's maximal block, the case is
    "3a"; symmetrically "3b"; when neither meets the other's maximal block,
    any elements of the respective maximal blocks work ("both").  Element
    ties break to the smallest index.  The returned witness is validated
    against the family's membership conditions.

    Passing the prebuilt family avoids rebuilding it per call.
    """
    n = p.n
    a = as_mask(A, n)
    b = as_mask(B, n)
    if not a or not b:
        raise ValueError("A and B must be nonempty")
    if a & b:
        raise ValueError("A and B must be disjoint")
    gmasks = p.masks
    ma = gmasks[maximal_group(a, p)]
    mb = gmasks[maximal_group(b, p)]
    if a & mb:
        i = (a & mb & -(a & mb)).bit_length()
        j = (b & mb & -(b & mb)).bit_length()
        case = "3a"
    elif b & ma:
        i = (a & ma & -(a & ma)).bit_length()
        j = (b & ma & -(b & ma)).bit_length()
        case = "3b"
    else:
        i = (a & ma & -(a & ma)).bit_length()
        j = (b & mb & -(b & mb)).bit_length()
        case = "both"
    if V is None:
        V = build_grouped_family(p)
    mset = V.member_set
    ib, jb = 1 << (i - 1), 1 << (j - 1)
    ok_a = (b | ib) in mset and ((a | jb) & ~ib) in mset
    ok_b = (a | jb) in mset and ((b | ib) & ~jb) in mset
    expected = {"3a": ok_a, "3b": ok_b, "both": ok_a and ok_b}[case]
    if not expected:
        from .errors import WitnessError
        raise WitnessError(
            f"grouped witness ({i},{j},{case}) failed membership validation "
            f"for A={elements_of(a)}, B={elements_of(b)}")
    return (i, j, case)
