"""Shared fixtures: memoized pipeline artifacts and reference complexes."""

from __future__ import annotations

from types import SimpleNamespace

import pytest

import rpforge as rp


# the unique 6-vertex triangulation of the projective plane
RP2_MINIMAL = (
    (1, 2, 5), (1, 2, 6), (1, 3, 4), (1, 3, 6), (1, 4, 5),
    (2, 3, 4), (2, 3, 5), (3, 5, 6), (2, 4, 6), (4, 5, 6),
)


def build_chain(n: int, kind: str) -> SimpleNamespace:
    """Family -> lattice -> pulled triangulation -> quotient for one config."""
    k = 1 if kind == "single" else rp.default_k(n)
    partition = rp.make_partition(n, k)
    V = rp.build_grouped_family(partition)
    lattice = rp.convex_hull(V)
    S, inv = rp.pull_triangulate(lattice)
    Q = rp.quotient(S, inv)
    return SimpleNamespace(n=n, kind=kind, partition=partition, V=V,
                           lattice=lattice, S=S, inv=inv, Q=Q)


@pytest.fixture(scope="session")
def chain():
    """Memoized access to pipeline artifacts: chain(n, kind)."""
    cache: dict[tuple[int, str], SimpleNamespace] = {}

    def get(n: int, kind: str = "single") -> SimpleNamespace:
        key = (n, kind)
        if key not in cache:
            cache[key] = build_chain(n, kind)
        return cache[key]

    return get


@pytest.fixture
def rp2_complex():
    return rp.SimplicialComplex(RP2_MINIMAL)
